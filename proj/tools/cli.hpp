#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cavnoise::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int { ok = 0, validation_error = 1, numerical_error = 2, oracle_failure = 3 };

/// `%.12g` inside [1e-3, 1e4), `%.12e` outside, "0" for zero.
std::string format_number(double x);

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Where an output file goes: relative paths land in $CAVNOISE_OUTPUT_DIR when set.
std::string resolve_output(const std::string& requested, const std::string& fallback);

/// Parses `args` (without the program name), runs the subcommand, and
/// returns its exit status. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavnoise::cli
