#include "mfpg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mfpg::cli::dispatch(argc, argv, std::cout, std::cerr); }
