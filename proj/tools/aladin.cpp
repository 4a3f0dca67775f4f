// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "aladin/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return aladin::run_cli(args, std::cout, std::cerr);
}
