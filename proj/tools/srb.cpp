#include <iostream>

#include "srb/cli.hpp"

int main(int argc, char** argv) { return srb::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
