#include <iostream>

#include "tmlp/cli/run.hpp"

int main(int argc, char** argv) { return tmlp::cli::main_entry(argc, argv, std::cout, std::cerr); }
