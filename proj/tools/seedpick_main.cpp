#include <iostream>
#include <string>
#include <vector>

#include "seedpick/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return seedpick::run_cli(args, std::cout, std::cerr);
}
