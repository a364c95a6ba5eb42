#include <iostream>

#include "weibayes/cli.hpp"

int main(int argc, char** argv) { return weibayes::run_cli(argc, argv, std::cout, std::cerr); }
