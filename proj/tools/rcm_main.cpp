// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/cli.hpp"

int main(int argc, char** argv) { return rcm::cli_main(argc, argv); }
