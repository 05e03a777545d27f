#include <iostream>

#include "popsim/cli.hpp"

int main(int argc, char** argv) { return popsim::cli::main(argc, argv, std::cout, std::cerr); }
