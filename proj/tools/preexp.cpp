// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "preexp/cli.hpp"

int main(int argc, char** argv) { return preexp::run_cli(argc, argv, std::cout, std::cerr); }
