#pragma once

#include <chrono>
#include <string>

namespace advbench {

struct ProcessResult {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
  bool timed_out = false;
};

/// Runs `command` through /bin/sh -c in its own process group, capturing
/// stdout and stderr. On timeout the whole group is killed and `timed_out`
/// is set.
ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout);

/// Single-quotes `s` for /bin/sh.
std::string shell_quote(const std::string& s);

}  // namespace advbench
