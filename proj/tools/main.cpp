#include <iostream>

#include "diracwalk/cli.hpp"

int main(int argc, char** argv) { return dqw::cli::run_cli(argc, argv, std::cout, std::cerr); }
