#include <iostream>

#include "capassign/cli.hpp"

int main(int argc, char** argv) { return capassign::cli::main(argc, argv, std::cout, std::cerr); }
