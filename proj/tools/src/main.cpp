#include <iostream>

#include "parsimix_cli/cli.hpp"

int main(int argc, char** argv) { return parsimix::cli::run(argc, argv, std::cout, std::cerr); }
