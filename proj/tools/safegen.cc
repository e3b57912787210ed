#include <iostream>

#include "safegen/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return safegen::cli::run_cli(args, std::cout, std::cerr);
}
