#include <iostream>

#include "compsum_cli/commands.hpp"

int main(int argc, char** argv) { return compsum::cli::run_cli(argc, argv, std::cout, std::cerr); }
