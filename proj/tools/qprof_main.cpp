#include <iostream>

#include "qprof/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qprof::run_cli(args, std::cout, std::cerr);
}
