// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "autoplan/cli.hpp"

int main(int argc, char** argv) {
    return autoplan::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
