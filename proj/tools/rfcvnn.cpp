#include <iostream>

#include "rfcvnn/cli.hpp"

int main(int argc, char** argv) { return rfcvnn::run_cli(argc, argv, std::cout, std::cerr); }
