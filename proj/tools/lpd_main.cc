#include <iostream>

#include "lifetime_pd/cli.h"

int main(int argc, char** argv) {
  return lifetime_pd::run_cli(argc, argv, std::cout, std::cerr);
}
