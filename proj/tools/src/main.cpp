#include "vkctrl/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return vkctrl::cli::run(argc, argv, std::cout, std::cerr); }
