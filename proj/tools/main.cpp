#include <iostream>

#include "infoseek/cli.hpp"

int main(int argc, char** argv) { return infoseek::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
