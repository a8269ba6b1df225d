#include <iostream>

#include "tsncbs/cli.hpp"

int main(int argc, char** argv) { return tsncbs::run_cli(argc, argv, std::cout, std::cerr); }
