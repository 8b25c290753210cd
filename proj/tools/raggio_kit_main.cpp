#include <iostream>

#include "raggio/cli.hpp"

int main(int argc, char** argv) {
  return raggio::cli::run(argc, argv, std::cout, std::cerr);
}
