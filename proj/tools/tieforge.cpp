#include <iostream>

#include "tieforge/cli/commands.hpp"

int main(int argc, char** argv) { return tieforge::cli::run(argc, argv, std::cout, std::cerr); }
