#include <iostream>

#include "thermalize/commands.hpp"

int main(int argc, char** argv) {
    return thermalize::run_cli(argc, argv, std::cout, std::cerr);
}
