#include <iostream>

#include "ptai/cli/commands.hpp"

int main(int argc, char** argv) { return ptai::cli::run(argc, argv, std::cout, std::cerr); }
