#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orderthresh::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Data comes from `in`
/// when no input file is given; results go to `out`, diagnostics to `err`.
int parse_and_dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
                       std::ostream& err);

/// Values, one per line. Blank lines are skipped; anything else that is not
/// a number raises DomainError naming the line.
std::vector<double> read_values(std::istream& in, const std::string& source);

/// Comma-separated rows, one group per line, blank lines skipped.
std::vector<std::vector<double>> read_rows(std::istream& in, const std::string& source);

}  // namespace orderthresh::cli
