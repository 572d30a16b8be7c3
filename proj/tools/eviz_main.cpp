#include <iostream>

#include "eviz/cli.hpp"

int main(int argc, char** argv) { return eviz::run_cli(argc, argv, std::cout, std::cerr); }
