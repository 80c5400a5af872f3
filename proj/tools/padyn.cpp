#include <iostream>

#include "padyn/cli.hpp"

int main(int argc, char** argv) {
  return padyn::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
