#include <iostream>

#include "aoicache/commands.hpp"

int main(int argc, char** argv) { return aoicache::run_cli(argc, argv, std::cout, std::cerr); }
