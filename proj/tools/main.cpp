#include <iostream>

#include "debias/experiment.hpp"

int main(int argc, char** argv) {
  return debias::cli::run_cli(argc, argv, std::cout, std::cerr);
}
