#include <iostream>

#include "lfoacc/cli.hpp"

int main(int argc, char** argv) { return lfoacc::cli::run(argc, argv, std::cout, std::cerr); }
