#include "adaptive_ope/config.hpp"

#include <iostream>

int main(int argc, char** argv) { return aope::run_cli(argc, argv, std::cout, std::cerr); }
