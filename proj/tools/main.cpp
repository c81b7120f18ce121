#include "otguide/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return otguide::cli::run(argc, argv, std::cout, std::cerr);
}
