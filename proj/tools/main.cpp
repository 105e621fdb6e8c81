#include <iostream>
#include <string>
#include <vector>

#include "fractree/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fractree::run_cli(args, std::cout, std::cerr);
}
