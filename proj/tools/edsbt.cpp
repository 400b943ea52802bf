// SPDX-License-Identifier: Apache-2.0
#include "edsbt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return edsbt::cli::run(argc, argv, std::cout, std::cerr);
}
