#include "dank/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dank::cli::run_cli(argc, argv, std::cout, std::cerr); }
