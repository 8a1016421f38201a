#include <iostream>

#include "charfront/cli.hpp"

int main(int argc, char** argv) {
    return charfront::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
