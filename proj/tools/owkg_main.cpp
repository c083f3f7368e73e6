#include <iostream>

#include "owkg/cli.hpp"

int main(int argc, char** argv) {
  return owkg::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
