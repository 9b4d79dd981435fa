#include <iostream>
#include <string>
#include <vector>

#include "ocrd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ocrd::cli::run(args, std::cout, std::cerr);
}
