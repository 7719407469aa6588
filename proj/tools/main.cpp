#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return gridsync::cli::main(argc, argv, std::cout, std::cerr); }
