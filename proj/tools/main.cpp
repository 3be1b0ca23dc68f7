#include <iostream>

#include "trek/cli.hpp"

int main(int argc, char** argv) {
  return trek::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
