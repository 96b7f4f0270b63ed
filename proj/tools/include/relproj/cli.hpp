#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "relproj/kaczmarz.hpp"

namespace relproj::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalAnomaly = 3, kGuardExceeded = 4 };

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// A linear system read from the plain-text instance format: one equation per
/// line as "a_1 ... a_q | b", '#' starts a comment.
struct Instance {
  Matrix m;
  Vector b;
};

Instance read_instance(std::istream& in);
Instance read_instance_file(const std::filesystem::path& path);
void write_instance(std::ostream& out, const Instance& inst, const std::string& comment = {});

/// Gaussian rows normalized to unit length and a Gaussian right-hand side.
Instance gaussian_instance(Index p, Index q, std::uint64_t seed);

/// Parses "0,1;2" into {{0, 1}, {2}}. An empty string means one block per row.
std::vector<std::vector<std::size_t>> parse_blocks(const std::string& spec, std::size_t rows);

/// 17 significant digits, which read back exactly.
std::string format_double(double x);

/// Two plotted coordinates of one trace file, plus the optional subsequence
/// from its companion file.
struct PlotTrace {
  std::string title;
  std::vector<std::pair<double, double>> path;
  std::vector<std::pair<double, double>> highlight;
};

PlotTrace read_plot_trace(const std::filesystem::path& csv);
std::string render_svg(const std::vector<PlotTrace>& traces);

}  // namespace relproj::cli
