#include <iostream>

#include "matchsim/cli_runner.hpp"

int main(int argc, char** argv) { return matchsim::run_cli(argc, argv, std::cout, std::cerr); }
