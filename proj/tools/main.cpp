#include <iostream>

#include "taxrewire/cli.hpp"

int main(int argc, char** argv) { return taxrewire::cli::main_entry(argc, argv, std::cout, std::cerr); }
