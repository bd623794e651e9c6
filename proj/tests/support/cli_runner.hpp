#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef GPTPAT_CLI_PATH
#error "GPTPAT_CLI_PATH must point at the gptpat binary"
#endif

namespace clirun {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs the gptpat binary inside `workdir` with the given argument string.
inline CliResult run(const std::filesystem::path& workdir, const std::string& args) {
  auto out_path = workdir / "_stdout.txt";
  auto err_path = workdir / "_stderr.txt";
  std::string command = "cd '" + workdir.string() + "' && '" + GPTPAT_CLI_PATH + "' " + args +
                        " >'" + out_path.string() + "' 2>'" + err_path.string() + "'";
  int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

}  // namespace clirun
