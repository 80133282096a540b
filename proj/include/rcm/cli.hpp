// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_CLI_HPP
#define RCM_CLI_HPP

// Command-line entry point, callable in-process so tests can drive the tool
// without spawning. Returns the process exit code; failures print a single
// "error: ..." line on stderr.

namespace rcm {

int cli_main(int argc, const char* const* argv);

}  // namespace rcm

#endif  // RCM_CLI_HPP
