#include <iostream>

#include "commonlibs/cli.h"

int main(int argc, char** argv) {
  return commonlibs::run_cli(argc, argv, std::cout, std::cerr);
}
