#include <iostream>

#include "sdcs_cli/commands.hpp"

int main(int argc, char** argv) { return sdcs::cli::run_cli(argc, argv, std::cout, std::cerr); }
