#include <iostream>

#include "femgraph/cli.hpp"

int main(int argc, char** argv) { return femgraph::cli::run(argc, argv, std::cout, std::cerr); }
