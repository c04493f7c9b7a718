#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "incstab/config.hpp"

namespace incstab {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRefused = 1;
inline constexpr int kExitError = 2;

/// Executes a parsed job. Relative output paths resolve against `out_dir`
/// (the working directory when empty). Returns 0 or 1; throws on errors.
int RunJob(const JobConfig& config, const std::filesystem::path& out_dir, std::ostream& out);

/// Load + run; every exception is reported on `err` and mapped to exit 2.
int RunCommand(const std::filesystem::path& config, const std::filesystem::path& out_dir,
               std::ostream& out, std::ostream& err);
int ValidateCommand(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int PlotCommand(const std::filesystem::path& cloud_csv, const std::vector<std::string>& regions,
                const std::filesystem::path& svg, std::ostream& out, std::ostream& err);

/// Argument parsing front end used by the executable.
int CliMain(int argc, char** argv);

}  // namespace incstab
