#include <iostream>

#include "recsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return recsim::run_cli(args, std::cout, std::cerr);
}
