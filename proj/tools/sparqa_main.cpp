#include <iostream>

#include "sparqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sparqa::RunCli(args, std::cout, std::cerr);
}
