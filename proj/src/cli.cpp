#include "owkg/cli.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "owkg/analytic.hpp"
#include "owkg/kg_io.hpp"
#include "owkg/kinship.hpp"
#include "owkg/oracle.hpp"
#include "owkg/simulation.hpp"
#include "owkg/split_io.hpp"
#include "owkg/table.hpp"
#include "owkg/world_split.hpp"

namespace owkg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kGridTol = 1e-12;
constexpr std::size_t kMaxGridPoints = 1000000;
constexpr const char* kGraphMetaFile = "graph.json";

double parse_number(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw DomainError(fmt::format("bad number '{}' in '{}'", s, context));
  }
  return v;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

// Decimal places written in a number, e.g. 2 for "0.05" and 3 for "1.5e-2".
int decimals(const std::string& s) {
  const std::size_t e = s.find_first_of("eE");
  const std::string mantissa = s.substr(0, e);
  const std::size_t dot = mantissa.find('.');
  int places = dot == std::string::npos ? 0 : static_cast<int>(mantissa.size() - dot - 1);
  if (e != std::string::npos) places -= std::stoi(s.substr(e + 1));
  return std::max(places, 0);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split_on(text, ':');
  std::vector<double> out;
  if (parts.size() == 3) {
    const double start = parse_number(parts[0], text);
    const double stop = parse_number(parts[1], text);
    const double step = parse_number(parts[2], text);
    // Points are rounded to the written precision so 0.3 + 3 * 0.1 prints as 0.6.
    const int places = std::max(decimals(parts[0]), decimals(parts[2]));
    const double scale = places <= 15 ? std::pow(10.0, places) : 0.0;
    if (!(step > 0.0)) throw DomainError(fmt::format("grid '{}': step must be positive", text));
    if (stop < start) throw DomainError(fmt::format("grid '{}': stop is below start", text));
    for (std::size_t i = 0;; ++i) {
      double v = start + static_cast<double>(i) * step;
      if (v > stop + kGridTol) break;
      if (scale > 0.0) v = std::round(v * scale) / scale;
      if (std::abs(v - stop) <= kGridTol) v = stop;
      out.push_back(v);
      if (out.size() > kMaxGridPoints) throw DomainError(fmt::format("grid '{}' is too long", text));
    }
    return out;
  }
  if (parts.size() != 1) throw DomainError(fmt::format("grid '{}': expected start:stop:step", text));
  for (const auto& item : split_on(text, ',')) out.push_back(parse_number(item, text));
  return out;
}

namespace {

struct Context {
  std::vector<std::string> args;
  fs::path out_dir;
  std::string format = "csv";
  std::uint64_t seed = 0;
  json params = json::object();
  json results = json::object();
  std::vector<std::string> outputs;
};

void write_table(Context& ctx, const std::string& name, const Table& table) {
  const std::string file = name + (ctx.format == "json" ? ".json" : ".csv");
  std::ofstream os(ctx.out_dir / file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (ctx.out_dir / file).string());
  if (ctx.format == "json") {
    write_json(os, table);
  } else {
    write_csv(os, table);
  }
  ctx.outputs.push_back(file);
}

// Arguments without --out, so a replay can redirect the output.
std::vector<std::string> replayable_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
    } else if (args[i].rfind("--out=", 0) != 0) {
      out.push_back(args[i]);
    }
  }
  return out;
}

void write_manifest(const Context& ctx, const std::string& command) {
  json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["command"] = command;
  m["args"] = replayable_args(ctx.args);
  m["out_dir"] = ctx.out_dir.string();
  m["seed"] = ctx.seed;
  m["format"] = ctx.format;
  m["params"] = ctx.params;
  m["results"] = ctx.results;
  m["outputs"] = ctx.outputs;
  std::ofstream os(ctx.out_dir / (command + ".manifest.json"), std::ios::binary);
  os << m.dump(2) << '\n';
}

// Options shared by the model-level subcommands.
struct ModelOptions {
  std::string l;
  std::string alpha;
  std::string beta;
  std::string rho = "0";
  std::vector<std::string> metrics{"mrr"};
  std::int64_t n = 43;
  std::int64_t n_entity = 14505;

  std::vector<double> ls;
  std::vector<double> alphas;
  std::vector<double> rhos;
  std::vector<RankingFunction> rfs;
};

void add_model_options(CLI::App* sub, ModelOptions& o, const std::string& l_default,
                       const std::string& beta_default) {
  o.l = l_default;
  o.beta = beta_default;
  sub->add_option("--l,--l-grid", o.l, "strength grid")->capture_default_str();
  auto* a = sub->add_option("--alpha,--alpha-grid", o.alpha, "alpha grid (1 - beta)");
  auto* b = sub->add_option("--beta,--beta-grid", o.beta, "sparsity grid")->capture_default_str();
  a->excludes(b);
  sub->add_option("--rho", o.rho, "correlation grid")->capture_default_str();
  sub->add_option("--metric", o.metrics, "metrics: mrr, hits@K, log_mrr, p_mrr@P")
      ->capture_default_str();
  sub->add_option("--n", o.n, "answers per query")->capture_default_str();
  sub->add_option("--n-entity", o.n_entity, "entities")->capture_default_str();
}

void resolve(ModelOptions& o, Context& ctx) {
  o.ls = parse_grid(o.l);
  if (!o.alpha.empty()) {
    o.alphas = parse_grid(o.alpha);
  } else {
    for (double b : parse_grid(o.beta)) o.alphas.push_back(1.0 - b);
  }
  o.rhos = parse_grid(o.rho);
  o.rfs.clear();
  std::vector<std::string> tags;
  for (const auto& m : o.metrics) {
    o.rfs.push_back(RankingFunction::parse(m));
    tags.push_back(o.rfs.back().tag());
  }
  ctx.params["l"] = o.ls;
  ctx.params["alpha"] = o.alphas;
  ctx.params["rho"] = o.rhos;
  ctx.params["metrics"] = tags;
  ctx.params["n"] = o.n;
  ctx.params["n_entity"] = o.n_entity;
}

AnalyticParams model_params(double l, double alpha, double rho, const ModelOptions& o) {
  AnalyticParams p;
  p.l = l;
  p.beta = 1.0 - alpha;
  p.n = o.n;
  p.n_entity = o.n_entity;
  p.rho = rho;
  return p;
}

Cell opt(const std::optional<double>& x) {
  if (x) return *x;
  return std::monostate{};
}

Cell flag(bool b) { return static_cast<std::int64_t>(b); }

// ---- gen-kg ----

struct GenKgOptions {
  int trees = 20;
  int depth = 3;
  int per_tree = 300;
  int branching = 20;
};

void cmd_gen_kg(Context& ctx, const GenKgOptions& o) {
  const TreeGenConfig cfg{o.trees, o.depth, o.per_tree, o.branching, ctx.seed};
  const KnowledgeGraph base = generate_base_population(cfg);
  const KnowledgeGraph kg = deduce_closure(base);
  const ValidationReport report = validate_closed_world(kg);
  const fs::path dir = ctx.out_dir / "kg";
  save_graph(dir, kg);
  {
    json meta;
    meta["closed"] = true;
    meta["entities"] = kg.num_entities();
    meta["facts"] = kg.num_facts();
    std::ofstream os(dir / kGraphMetaFile, std::ios::binary);
    os << meta.dump(2) << '\n';
  }
  ctx.params = {{"trees", o.trees},
                {"depth", o.depth},
                {"per_tree", o.per_tree},
                {"branching", o.branching}};
  ctx.results = {{"entities", kg.num_entities()},
                 {"base_facts", base.num_facts()},
                 {"facts", kg.num_facts()},
                 {"violations", report.violations.size()}};
  Table t{"gen_kg/1", {"entities", "base_facts", "facts", "violations"}, {}};
  t.add({static_cast<std::int64_t>(kg.num_entities()), static_cast<std::int64_t>(base.num_facts()),
         static_cast<std::int64_t>(kg.num_facts()),
         static_cast<std::int64_t>(report.violations.size())});
  write_table(ctx, "gen_kg", t);
  for (const auto& v : report.violations) {
    std::cerr << "violation: " << v.message << '\n';
  }
  if (!report.ok()) throw std::runtime_error("generated graph violates the closed-world rules");
}

// ---- split ----

struct SplitOptions {
  std::string kg_dir;
  double d = 0.75;
  double eta = 0.7;
  double rho = 0.0;
  double reference_l = 0.7;
};

KnowledgeGraph load_generated_graph(const fs::path& dir) {
  bool closed = false;
  std::ifstream meta(dir / kGraphMetaFile);
  if (meta) closed = json::parse(meta).value("closed", false);
  return load_graph(dir, closed);
}

void cmd_split(Context& ctx, const SplitOptions& o) {
  const fs::path kg_dir = o.kg_dir.empty() ? ctx.out_dir / "kg" : fs::path(o.kg_dir);
  const KnowledgeGraph kg = load_generated_graph(kg_dir);
  const SplitConfig cfg{o.d, o.eta, ctx.seed};
  WorldSplit split;
  std::optional<double> rho_hat;
  if (o.rho == 0.0) {
    split = split_independent(kg, cfg);
  } else {
    // Reference predictions: each fact predicted with probability reference_l.
    Rng rng(derive_seed(ctx.seed, 1));
    std::vector<bool> predictions(kg.num_facts());
    for (std::size_t i = 0; i < predictions.size(); ++i) predictions[i] = bernoulli(rng, o.reference_l);
    split = split_correlated(kg, cfg, {o.rho, predictions});
    rho_hat = empirical_correlation(missing_mask(split), non_train_slice(split, predictions));
  }
  save_split(ctx.out_dir / "split", split);
  ctx.params = {{"kg", kg_dir.string()}, {"d", o.d},     {"eta", o.eta},
                {"rho", o.rho},          {"reference_l", o.reference_l}};
  const auto count = [&](FactRole r) { return static_cast<std::int64_t>(split.count(r)); };
  ctx.results = {{"alpha", split.alpha()},
                 {"beta", split.sparsity()},
                 {"full", split.full.size()},
                 {"train", count(FactRole::kTrain)},
                 {"test", count(FactRole::kTest)},
                 {"missing", count(FactRole::kMissing)}};
  if (rho_hat) ctx.results["rho_empirical"] = *rho_hat;
  Table t{"split/1",
          {"d", "eta", "alpha", "beta", "rho", "rho_empirical", "full", "train", "test", "missing"},
          {}};
  t.add({o.d, o.eta, split.alpha(), split.sparsity(), o.rho, opt(rho_hat),
         static_cast<std::int64_t>(split.full.size()), count(FactRole::kTrain),
         count(FactRole::kTest), count(FactRole::kMissing)});
  write_table(ctx, "split", t);
}

// ---- queries ----

struct QueriesOptions {
  std::string split_dir;
  std::size_t min_answers = 10;
  std::size_t n = 500;
};

void cmd_queries(Context& ctx, const QueriesOptions& o) {
  const fs::path dir = o.split_dir.empty() ? ctx.out_dir / "split" : fs::path(o.split_dir);
  const WorldSplit split = load_split(dir);
  const auto queries = build_query_set(split, o.min_answers, o.n, ctx.seed);
  save_queries(ctx.out_dir / "queries.jsonl", queries);
  ctx.outputs.push_back("queries.jsonl");
  ctx.params = {{"split", dir.string()}, {"min_answers", o.min_answers}, {"n", o.n}};
  ctx.results = {{"eligible", eligible_queries(split, o.min_answers).size()},
                 {"selected", queries.size()}};
  Table t{"queries/1", {"index", "relation", "head", "train", "test", "missing"}, {}};
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    t.add({static_cast<std::int64_t>(i), std::string(relation_name(q.relation)),
           static_cast<std::int64_t>(q.head), static_cast<std::int64_t>(q.train.size()),
           static_cast<std::int64_t>(q.test.size()), static_cast<std::int64_t>(q.missing.size())});
  }
  write_table(ctx, "queries", t);
}

// ---- simulate / compare ----

struct SimOptions {
  ModelOptions model;
  int repeats = 500;
};

// Grid for (rho index ri, metric index mi) uses root derive_seed(seed, ri, mi).
template <typename Visit>
std::int64_t for_each_sim_cell(const Context& ctx, const SimOptions& o, Visit&& visit) {
  std::int64_t infeasible = 0;
  for (std::size_t ri = 0; ri < o.model.rhos.size(); ++ri) {
    for (std::size_t mi = 0; mi < o.model.rfs.size(); ++mi) {
      SimConfig sc;
      sc.params = model_params(0.5, 0.5, o.model.rhos[ri], o.model);
      sc.repeats = o.repeats;
      sc.root_seed = derive_seed(ctx.seed, ri, mi);
      for (const GridCell& cell : simulate_grid(o.model.ls, o.model.alphas, o.model.rfs[mi], sc)) {
        if (!cell.feasible) {
          ++infeasible;
          continue;
        }
        visit(cell, o.model.rfs[mi]);
      }
    }
  }
  return infeasible;
}

void cmd_simulate(Context& ctx, SimOptions& o) {
  resolve(o.model, ctx);
  ctx.params["repeats"] = o.repeats;
  Table t{"simulate/1", {"l", "alpha", "rho", "metric", "mean", "std", "repeats", "skipped"}, {}};
  const auto infeasible = for_each_sim_cell(ctx, o, [&](const GridCell& c, const RankingFunction& rf) {
    t.add({c.l, c.alpha, c.rho, rf.tag(), c.result.mean, c.result.std, c.result.repeats_used,
           c.result.skipped});
  });
  ctx.results = {{"rows", t.rows.size()}, {"infeasible_cells", infeasible}};
  write_table(ctx, "simulate", t);
}

void compare_grid(Context& ctx, SimOptions& o) {
  resolve(o.model, ctx);
  ctx.params["repeats"] = o.repeats;
  Table t{"compare/1",
          {"l", "alpha", "rho", "metric", "mc_mean", "mc_std", "repeats", "skipped", "analytic",
           "delta_upper", "tolerance", "within"},
          {}};
  std::int64_t within = 0;
  const auto infeasible = for_each_sim_cell(ctx, o, [&](const GridCell& c, const RankingFunction& rf) {
    const AnalyticParams p = model_params(c.l, c.alpha, c.rho, o.model);
    const ExpectationResult e = correlated_expectation(p, rf).exact;
    const double tol =
        2.0 * c.result.std / std::sqrt(static_cast<double>(c.result.repeats_used)) + e.delta_upper;
    const bool ok = std::abs(c.result.mean - e.value) <= tol;
    within += ok;
    t.add({c.l, c.alpha, c.rho, rf.tag(), c.result.mean, c.result.std, c.result.repeats_used,
           c.result.skipped, e.value, e.delta_upper, tol, flag(ok)});
  });
  ctx.results = {{"cells", t.rows.size()},
                 {"within", within},
                 {"fraction_within", t.rows.empty() ? 0.0 : static_cast<double>(within) / t.rows.size()},
                 {"infeasible_cells", infeasible}};
  write_table(ctx, "compare", t);
}

struct InconsistencyOptions {
  std::string dl = "0.05";
  double p = 0.05;
  std::int64_t trials = 10000;
  int variance_repeats = 100000;
  std::int64_t n_queries = 0;  // 0: take min_queries
};

// Variance draws use derive_seed(seed, 0, j) (j = 0 for l, j = k + 1 for the
// k-th l + dl); trials for the k-th dl use derive_seed(seed, 1, k).
void compare_inconsistency(Context& ctx, SimOptions& o, const InconsistencyOptions& io) {
  resolve(o.model, ctx);
  if (o.model.ls.size() != 1 || o.model.alphas.size() != 1) {
    throw DomainError("inconsistency comparison takes a single --l and --beta");
  }
  const std::vector<double> dls = parse_grid(io.dl);
  const double l = o.model.ls[0];
  const AnalyticParams base = model_params(l, o.model.alphas[0], 0.0, o.model);
  const RankingFunction rf = RankingFunction::mrr();
  ctx.params["dl"] = dls;
  ctx.params["p"] = io.p;
  ctx.params["trials"] = io.trials;
  ctx.params["variance_repeats"] = io.variance_repeats;
  ctx.params["n_queries"] = io.n_queries;
  const double v1 = estimate_variance(base, rf, io.variance_repeats, derive_seed(ctx.seed, 0, 0)).variance;
  Table t{"inconsistency/1",
          {"l", "dl", "alpha", "n", "p", "variance", "variance_strong", "c", "n_queries",
           "predicted", "unreliable", "empirical", "trials"},
          {}};
  for (std::size_t k = 0; k < dls.size(); ++k) {
    AnalyticParams strong = base;
    strong.l = l + dls[k];
    const double v2 =
        estimate_variance(strong, rf, io.variance_repeats, derive_seed(ctx.seed, 0, k + 1)).variance;
    const double c = min_queries_constant(l, base.beta, base.n, io.p, v1);
    const auto nq = io.n_queries > 0 ? io.n_queries
                                     : static_cast<std::int64_t>(min_queries_from_constant(c, dls[k]));
    const InconsistencyResult pred =
        inconsistency_probability(l, dls[k], base.beta, base.n, nq, v1, v2);
    const InconsistencyTrials emp =
        simulate_pairwise_inconsistency(l, dls[k], base, nq, io.trials, derive_seed(ctx.seed, 1, k));
    t.add({l, dls[k], o.model.alphas[0], base.n, io.p, v1, v2, c, nq, pred.p, flag(pred.unreliable),
           emp.probability, emp.trials});
  }
  write_table(ctx, "inconsistency", t);
}

// ---- analytic ----

void cmd_analytic(Context& ctx, ModelOptions& o) {
  resolve(o, ctx);
  Table t{"analytic/1",
          {"l", "alpha", "rho", "n", "n_entity", "metric", "exact", "delta_upper", "approx",
           "approx_error_bound", "approx_flagged", "l1", "l2", "derivative", "selection_adjusted",
           "rho_condition"},
          {}};
  std::int64_t infeasible = 0;
  std::optional<std::string> last_error;
  for (double rho : o.rhos) {
    for (const auto& rf : o.rfs) {
      for (double l : o.ls) {
        for (double alpha : o.alphas) {
          const AnalyticParams p = model_params(l, alpha, rho, o);
          CorrelatedExpectation ce;
          try {
            ce = correlated_expectation(p, rf);
          } catch (const InfeasibleCorrelation& e) {
            ++infeasible;
            last_error = e.what();
            continue;
          }
          const bool plain = rho == 0.0;
          std::optional<double> deriv, adjusted;
          if (plain && l > 0.0) deriv = expectation_derivative(p, rf);
          if (plain && p.beta < 1.0) adjusted = selection_adjusted_expectation(p, rf);
          Cell cond = std::monostate{};
          if (rf.kind() == RankingFunction::Kind::kMrr) cond = flag(rho_condition_holds(p));
          Cell approx = std::monostate{}, bound = std::monostate{}, flagged = std::monostate{};
          if (ce.approx) {
            approx = ce.approx->value;
            bound = ce.approx->approx_error_bound;
            flagged = flag(ce.approx->flagged);
          }
          t.add({l, alpha, rho, o.n, o.n_entity, rf.tag(), ce.exact.value, ce.exact.delta_upper,
                 approx, bound, flagged, ce.strengths.l1, ce.strengths.l2, opt(deriv),
                 opt(adjusted), cond});
        }
      }
    }
  }
  if (t.rows.empty() && last_error) throw DomainError(*last_error);
  ctx.results = {{"rows", t.rows.size()}, {"infeasible_cells", infeasible}};
  write_table(ctx, "analytic", t);
}

// ---- variance ----

struct VarianceOptions {
  ModelOptions model;
  int repeats = 100000;
  std::string dl;
  double p = 0.05;
  std::optional<double> v;
};

void cmd_variance(Context& ctx, VarianceOptions& o) {
  resolve(o.model, ctx);
  ctx.params["repeats"] = o.repeats;
  ctx.params["p"] = o.p;
  if (o.v) ctx.params["v"] = *o.v;
  const std::vector<double> dls = o.dl.empty() ? std::vector<double>{} : parse_grid(o.dl);
  ctx.params["dl"] = dls;
  Table var{"variance/1", {"l", "alpha", "n", "n_entity", "metric", "repeats", "mean", "variance"}, {}};
  Table mq{"min_queries/1",
           {"l", "alpha", "n", "p", "variance", "variance_source", "c", "dl", "n_queries"},
           {}};
  std::uint64_t cell = 0;
  for (const auto& rf : o.model.rfs) {
    for (double l : o.model.ls) {
      for (double alpha : o.model.alphas) {
        const AnalyticParams p = model_params(l, alpha, 0.0, o.model);
        double v = 0.0;
        if (o.v) {
          v = *o.v;
        } else {
          // Cell c uses derive_seed(seed, c).
          const VarianceEstimate est = estimate_variance(p, rf, o.repeats, derive_seed(ctx.seed, cell));
          var.add({l, alpha, o.model.n, o.model.n_entity, rf.tag(), est.n, est.mean, est.variance});
          v = est.variance;
        }
        ++cell;
        if (dls.empty() || rf.kind() != RankingFunction::Kind::kMrr) continue;
        const double c = min_queries_constant(l, p.beta, p.n, o.p, v);
        for (double dl : dls) {
          mq.add({l, alpha, o.model.n, o.p, v, std::string(o.v ? "given" : "estimated"), c, dl,
                  static_cast<std::int64_t>(min_queries_from_constant(c, dl))});
        }
      }
    }
  }
  if (!o.v) write_table(ctx, "variance", var);
  if (!dls.empty()) write_table(ctx, "min_queries", mq);
  ctx.results = {{"variance_rows", var.rows.size()}, {"min_queries_rows", mq.rows.size()}};
}

// ---- pipeline ----

struct PipelineOptions {
  std::string split_dir;
  std::string queries_file;
  std::string l = "0.1:1.0:0.1";
  std::string rho = "0";
  std::vector<std::string> metrics{"mrr"};
  std::vector<double> positive_band{0.5, 1.0};
  std::vector<double> negative_band{0.0, 0.5};
};

// Oracle i of the sweep for the r-th rho uses seed derive_seed(seed, r, i),
// as sweep_strength(..., derive_seed(seed, r)) does.
void cmd_pipeline(Context& ctx, const PipelineOptions& o) {
  const fs::path split_dir = o.split_dir.empty() ? ctx.out_dir / "split" : fs::path(o.split_dir);
  const fs::path qfile =
      o.queries_file.empty() ? ctx.out_dir / "queries.jsonl" : fs::path(o.queries_file);
  const WorldSplit split = load_split(split_dir);
  const auto queries = load_queries(qfile);
  const std::vector<double> ls = parse_grid(o.l);
  const std::vector<double> rhos = parse_grid(o.rho);
  std::vector<RankingFunction> rfs;
  std::vector<std::string> tags;
  for (const auto& m : o.metrics) {
    rfs.push_back(RankingFunction::parse(m));
    tags.push_back(rfs.back().tag());
  }
  if (o.positive_band.size() != 2 || o.negative_band.size() != 2) {
    throw DomainError("score bands take two values: low,high");
  }
  const ScoreBands bands{o.positive_band[0], o.positive_band[1], o.negative_band[0],
                         o.negative_band[1]};
  bands.validate();
  ctx.params = {{"split", split_dir.string()}, {"queries", qfile.string()},
                {"l", ls},                     {"rho", rhos},
                {"metrics", tags},             {"positive_band", o.positive_band},
                {"negative_band", o.negative_band}};
  Table t{"pipeline/1",
          {"model_id", "l_nominal", "rho", "d", "metric", "sparse_mean", "sparse_std", "full_mean",
           "full_std", "n_queries", "sparse_analytic", "analytic_delta"},
          {}};
  std::int64_t infeasible = 0;
  for (std::size_t r = 0; r < rhos.size(); ++r) {
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const OracleSpec spec{ls[i], rhos[r], bands, derive_seed(derive_seed(ctx.seed, r), i)};
      std::vector<PipelinePoint> points;
      try {
        points = run_pipeline(split, queries, spec, rfs);
      } catch (const InfeasibleCorrelation&) {
        ++infeasible;
        continue;
      }
      for (std::size_t m = 0; m < points.size(); ++m) {
        const auto& p = points[m];
        Cell ref = std::monostate{}, delta = std::monostate{};
        if (rhos[r] == 0.0) {
          const SparseReference sr = sparse_reference(split, queries, ls[i], rfs[m]);
          ref = sr.mean;
          delta = sr.mean_delta;
        }
        t.add({fmt::format("oracle_l{}_rho{}", ls[i], rhos[r]), p.l_nominal, p.rho, p.density,
               p.metric, p.sparse.mean, p.sparse.std, p.full.mean, p.full.std,
               static_cast<std::int64_t>(p.n_queries), ref, delta});
      }
    }
  }
  ctx.results = {{"rows", t.rows.size()}, {"infeasible_models", infeasible}};
  write_table(ctx, "pipeline", t);
}

std::optional<std::string> env_out_dir() {
  const char* v = std::getenv(kOutDirEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-world knowledge graph evaluation experiments"};
  app.name("owkg");
  app.fallthrough();
  Context ctx;
  ctx.args = args;
  std::string out_dir;
  std::string replay;
  app.add_option("--seed", ctx.seed, "root seed")->capture_default_str();
  app.add_option("--out", out_dir,
                 fmt::format("output directory (default ${} or .)", kOutDirEnv));
  app.add_option("--format", ctx.format, "table format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--replay", replay, "rerun the command recorded in a manifest");
  app.require_subcommand(0, 1);

  std::function<void()> handler;
  std::string command;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&command, name] { command = name; });
    return s;
  };

  GenKgOptions gen;
  {
    auto* s = sub("gen-kg", "generate a closed-world kinship graph");
    s->add_option("--trees", gen.trees)->capture_default_str();
    s->add_option("--depth", gen.depth, "married generations below the root couple")
        ->capture_default_str();
    s->add_option("--per-tree", gen.per_tree)->capture_default_str();
    s->add_option("--branching", gen.branching, "max children per couple")->capture_default_str();
  }
  SplitOptions split;
  {
    auto* s = sub("split", "split a closed-world graph into train / test / missing");
    s->add_option("--kg", split.kg_dir, "graph directory (default <out>/kg)");
    s->add_option("--d,--density", split.d)->capture_default_str();
    s->add_option("--eta,--train-ratio", split.eta)->capture_default_str();
    s->add_option("--rho", split.rho, "correlation of missing facts with reference predictions")
        ->capture_default_str();
    s->add_option("--reference-l", split.reference_l, "strength of the reference predictions")
        ->capture_default_str();
  }
  QueriesOptions queries;
  {
    auto* s = sub("queries", "sample evaluation queries from a split");
    s->add_option("--split", queries.split_dir, "split directory (default <out>/split)");
    s->add_option("--min-answers", queries.min_answers)->capture_default_str();
    s->add_option("--n", queries.n)->capture_default_str();
  }
  SimOptions sim;
  {
    auto* s = sub("simulate", "Monte Carlo grid of the missing-answer model");
    add_model_options(s, sim.model, "0.3:1.0:0.05", "0.2:0.8:0.2");
    s->add_option("--repeats", sim.repeats)->capture_default_str();
  }
  ModelOptions analytic;
  {
    auto* s = sub("analytic", "closed-form expectations");
    add_model_options(s, analytic, "0.7", "0.35");
  }
  VarianceOptions var;
  {
    auto* s = sub("variance", "per-query metric variance and minimum query counts");
    add_model_options(s, var.model, "0.7", "0.35");
    s->add_option("--repeats", var.repeats)->capture_default_str();
    s->add_option("--dl", var.dl, "strength gaps for minimum query counts");
    s->add_option("--p", var.p, "target inconsistency probability")->capture_default_str();
    s->add_option("--v", var.v, "use this variance instead of estimating it");
  }
  PipelineOptions pipe;
  {
    auto* s = sub("pipeline", "oracle models evaluated in sparse and full mode");
    s->add_option("--split", pipe.split_dir, "split directory (default <out>/split)");
    s->add_option("--queries", pipe.queries_file, "query file (default <out>/queries.jsonl)");
    s->add_option("--l,--l-grid", pipe.l)->capture_default_str();
    s->add_option("--rho", pipe.rho)->capture_default_str();
    s->add_option("--metric", pipe.metrics)->capture_default_str();
    s->add_option("--positive-band", pipe.positive_band)->delimiter(',')->expected(2);
    s->add_option("--negative-band", pipe.negative_band)->delimiter(',')->expected(2);
  }
  SimOptions cmp;
  InconsistencyOptions inc;
  std::string kind = "grid";
  {
    auto* s = sub("compare", "simulation against closed forms");
    add_model_options(s, cmp.model, "0.3:1.0:0.05", "0.2:0.8:0.2");
    s->add_option("--kind", kind)->check(CLI::IsMember({"grid", "inconsistency"}))
        ->capture_default_str();
    s->add_option("--repeats", cmp.repeats)->capture_default_str();
    s->add_option("--dl", inc.dl)->capture_default_str();
    s->add_option("--p", inc.p)->capture_default_str();
    s->add_option("--trials", inc.trials)->capture_default_str();
    s->add_option("--variance-repeats", inc.variance_repeats)->capture_default_str();
    s->add_option("--n-queries", inc.n_queries, "fixed query count (default: minimum count)");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  try {
    if (!replay.empty()) {
      if (!command.empty()) throw DomainError("--replay cannot be combined with a subcommand");
      std::ifstream is(replay);
      if (!is) throw DomainError("cannot read manifest " + replay);
      const json m = json::parse(is);
      if (m.value("schema_version", 0) != kManifestSchemaVersion) {
        throw DomainError("unsupported manifest schema version");
      }
      auto next = m.at("args").get<std::vector<std::string>>();
      next.push_back("--out");
      next.push_back(out_dir.empty() ? m.at("out_dir").get<std::string>() : out_dir);
      return run_cli(next, out, err);
    }
    if (command.empty()) {
      err << "error: a subcommand is required\n\n" << app.help();
      return 1;
    }
    if (out_dir.empty()) out_dir = env_out_dir().value_or(".");
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);

    if (command == "gen-kg") {
      cmd_gen_kg(ctx, gen);
    } else if (command == "split") {
      cmd_split(ctx, split);
    } else if (command == "queries") {
      cmd_queries(ctx, queries);
    } else if (command == "simulate") {
      cmd_simulate(ctx, sim);
    } else if (command == "analytic") {
      cmd_analytic(ctx, analytic);
    } else if (command == "variance") {
      cmd_variance(ctx, var);
    } else if (command == "pipeline") {
      cmd_pipeline(ctx, pipe);
    } else if (command == "compare") {
      ctx.params["kind"] = kind;
      if (kind == "grid") {
        compare_grid(ctx, cmp);
      } else {
        compare_inconsistency(ctx, cmp, inc);
      }
    }
    write_manifest(ctx, command);
    for (const auto& f : ctx.outputs) out << (ctx.out_dir / f).string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace owkg
