#include "hlap/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hlap::cli::run(argc, argv, std::cerr); }
