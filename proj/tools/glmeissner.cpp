#include <iostream>

#include "glmeissner/app.hpp"

int main(int argc, char** argv) { return glmeissner::run_cli(argc, argv, std::cout, std::cerr); }
