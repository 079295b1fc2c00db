#include <iostream>

#include "caustic/cli.hpp"

int main(int argc, char** argv) { return caustic::cli::run(argc, argv, std::cout, std::cerr); }
