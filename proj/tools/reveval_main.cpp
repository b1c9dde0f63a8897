#include <iostream>

#include "reveval/cli.hpp"

int main(int argc, char** argv) { return reveval::cli::run(argc, argv, std::cout, std::cerr); }
