#include <iostream>

#include "pcgrasp/cli.hpp"

int main(int argc, char** argv) { return pcgrasp::run_cli(argc, argv, std::cout, std::cerr); }
