#include <iostream>

#include "shadeloss/cli.hpp"

int main(int argc, char** argv) { return shadeloss::run_cli(argc, argv, std::cout, std::cerr); }
