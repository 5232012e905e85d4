#include <iostream>

#include "nora/cli.hpp"

int main(int argc, char** argv) {
  return nora::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
