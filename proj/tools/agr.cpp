#include <iostream>

#include "agr/cli.hpp"

int main(int argc, char** argv) { return agr::cli::run(argc, argv, std::cout, std::cerr); }
