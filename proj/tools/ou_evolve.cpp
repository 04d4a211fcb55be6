// SPDX-License-Identifier: MIT
#include "ouevolve/commands.hpp"

int main(int argc, char** argv) { return ouevolve::run_cli(argc, argv); }
