#include <iostream>
#include <string>
#include <vector>

#include "divlab/scenarios.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return divlab::run_cli(args, std::cout, std::cerr);
}
