#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return conecount::cli::dispatch(argc, argv, std::cout, std::cerr); }
