#include <iostream>

#include "crowdsoft/cli.hpp"

int main(int argc, char** argv) { return crowdsoft::cli::run(argc, argv, std::cout, std::cerr); }
