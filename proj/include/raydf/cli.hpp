// Copyright 2026 The raydf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "raydf/metrics.hpp"
#include "raydf/scene_io.hpp"

namespace raydf::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Parses argv-style arguments (without the program name), runs the command
/// and maps errors onto exit codes. Messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "HxW" or "HxWxD"; throws UsageError.
std::array<int, 3> parse_grid(const std::string& text, bool need_depth);
/// Comma-separated numbers; throws UsageError.
std::vector<double> parse_list(const std::string& text);
/// Number that may be "inf".
double parse_double(const std::string& text, const std::string& what);

struct DemoRow {
  double sigma = 0.0;
  std::string field;
  std::string decoder;
  double hit_error = 0.0;  // mean over GT hits of min(|error|, 1 m); misses count 1 m
  MetricsReport report;
};

struct DemoOptions {
  std::string scene = "box-room";
  std::vector<double> sigmas{0.05, 0.1, 0.2};
  std::array<int, 3> grid{32, 32, 128};
  double t = 0.5;
  std::uint64_t seed = 0;
};

/// Expected fields of every kind on the scene's GT hits, decoded by every
/// compatible decoder. Rows are sorted by sigma, then hit error.
std::vector<DemoRow> run_demo(const DemoOptions& opt);
CsvTable demo_table(const std::vector<DemoRow>& rows);

/// Line plot of a CSV file. `x` names the abscissa column; `ys` the series
/// (all other numeric columns when empty); `group` splits series by a column.
std::string plot_svg(const CsvTable& table, const std::string& x, const std::vector<std::string>& ys,
                     const std::string& group, const std::string& title);
CsvTable parse_csv(const std::string& text);

}  // namespace raydf::cli
