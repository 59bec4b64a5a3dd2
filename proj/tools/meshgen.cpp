#include <meshgen/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return meshgen::cli::run(argc, argv, std::cout, std::cerr); }
