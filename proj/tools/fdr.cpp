#include <iostream>

#include "fdr/cli.hpp"

int main(int argc, char** argv) { return fdr::run_cli(argc, argv, std::cout, std::cerr); }
