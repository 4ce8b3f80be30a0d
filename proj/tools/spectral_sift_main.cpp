#include "spectral_sift/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return spectral_sift::run_cli(argc, argv, std::cout, std::cerr);
}
