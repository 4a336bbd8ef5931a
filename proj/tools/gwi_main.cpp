// SPDX-License-Identifier: Apache-2.0
#include "gwi/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gwi::run_cli(args, std::cout, std::cerr);
}
