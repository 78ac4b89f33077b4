#include <iostream>

#include "veinmatch/cli.hpp"

int main(int argc, char** argv) {
  return veinmatch::dispatch(argc, argv, std::cout, std::cerr);
}
