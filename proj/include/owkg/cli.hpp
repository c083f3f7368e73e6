#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace owkg {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kOutDirEnv = "OWKG_OUT_DIR";

// "start:stop:step" (endpoints included when within 1e-12; the last point
// snaps to stop; points rounded to the decimals written in start and step),
// a comma list, or a single number.
std::vector<double> parse_grid(const std::string& text);

// args excludes the program name. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace owkg
