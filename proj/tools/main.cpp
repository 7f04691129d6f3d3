#include <iostream>

#include "rhyme/cli.hpp"

int main(int argc, char** argv) { return rhyme::dispatch(argc, argv, std::cout, std::cerr); }
