#include <iostream>

#include "cairo/service/cli.hpp"

int main(int argc, char** argv) { return cairo::run_cli(argc, argv, std::cout, std::cerr); }
