#include <iostream>

#include "periodic/cli.hpp"

int main(int argc, char** argv) { return periodic::cli::main_entry(argc, argv, std::cout, std::cerr); }
