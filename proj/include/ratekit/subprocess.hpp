#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "ratekit/errors.hpp"

namespace ratekit {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
};

/// First whitespace-delimited token of a command line.
inline std::string command_executable(const std::string& command) {
  std::istringstream in(command);
  std::string tok;
  in >> tok;
  return tok;
}

/// True if `exe` names something runnable: an executable path, or a name
/// found on PATH.
inline bool executable_exists(const std::string& exe) {
  namespace fs = std::filesystem;
  if (exe.empty()) return false;
  if (exe.find('/') != std::string::npos)
    return ::access(exe.c_str(), X_OK) == 0 && !fs::is_directory(fs::path(exe));
  const char* path_env = std::getenv("PATH");
  if (!path_env) return false;
  std::istringstream paths(path_env);
  std::string dir;
  while (std::getline(paths, dir, ':')) {
    if (dir.empty()) continue;
    const fs::path candidate = fs::path(dir) / exe;
    if (::access(candidate.c_str(), X_OK) == 0 && !fs::is_directory(candidate)) return true;
  }
  return false;
}

inline void require_executable(const std::string& command) {
  const std::string exe = command_executable(command);
  if (!executable_exists(exe))
    throw ToolMissingError("executable '" + exe + "' not found (from command: " + command + ")");
}

/// Runs a shell command, capturing stdout+stderr.
inline CommandResult run_command(const std::string& command) {
  const std::string wrapped = command + " 2>&1";
  FILE* pipe = ::popen(wrapped.c_str(), "r");
  if (!pipe) throw ToolError("failed to launch command: " + command);
  CommandResult result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1) throw ToolError("failed to reap command: " + command);
  if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exit_code = 128 + WTERMSIG(status);
  return result;
}

}  // namespace ratekit
