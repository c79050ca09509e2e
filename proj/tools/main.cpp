#include <iostream>
#include <string_view>
#include <vector>

#include "ekb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string_view> args(argv, argv + argc);
  return ekb::cli::run(args, std::cout, std::cerr);
}
