#include <iostream>

#include "otfs/cli.hpp"

int main(int argc, char** argv) { return otfs::cli::run(argc, argv, std::cout, std::cerr); }
