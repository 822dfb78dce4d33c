#include <iostream>
#include <string>
#include <vector>

#include "noonlab/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return noonlab::cli::main_entry(std::move(args), std::cout, std::cerr);
}
