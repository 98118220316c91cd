#include "ecgssl/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return ecgssl::cli::run(argc, argv, std::cout, std::cerr); }
