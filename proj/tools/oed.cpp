#include <iostream>

#include "oed/cli/dispatch.hpp"

int main(int argc, char** argv) { return oed::cli::dispatch(argc, argv, std::cout, std::cerr); }
