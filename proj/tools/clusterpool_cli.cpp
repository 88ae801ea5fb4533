#include <iostream>

#include "clusterpool/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return clusterpool::run_cli(args, std::cout, std::cerr);
}
