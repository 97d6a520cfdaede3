#include <iostream>

#include "adrl/cli.hpp"

int main(int argc, char** argv) { return adrl::cli::run(argc, argv, std::cout, std::cerr); }
