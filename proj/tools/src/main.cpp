#include <iostream>

#include "automix/cli.hpp"

int main(int argc, char** argv) {
  return automix::cli::run(argc, argv, std::cout, std::cerr);
}
