// SPDX-License-Identifier: MIT
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return sheetlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
