#include <iostream>

#include "lsde/cli.hpp"

int main(int argc, char** argv) { return lsde::run_cli(argc, argv, std::cout, std::cerr); }
