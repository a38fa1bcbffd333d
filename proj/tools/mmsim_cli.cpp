#include <iostream>

#include "mmsim/cli/cli.hpp"

int main(int argc, char** argv) { return mmsim::cli::run_cli(argc, argv, std::cout, std::cerr); }
