#include "kmaha/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kmaha::cli::run(argc, argv, std::cout, std::cerr); }
