#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <vector>

namespace wentzell {

/// Shortest round-trip decimal representation; identical bytes run to run.
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

void write_text_file(const std::string& path, const std::string& content);

/// Symmetric-agnostic coordinate text dump: one "row col value" line per
/// stored entry, row-major order.
std::string coordinate_format(const Eigen::SparseMatrix<double>& m);
std::string coordinate_format(const Eigen::MatrixXd& m);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal self-contained SVG line plot (fixed palette, linear axes).
std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<PlotSeries>& series);

/// Turns (index, value) pairs into a staircase polyline.
PlotSeries staircase(const std::string& label, const Eigen::VectorXd& values);

}  // namespace wentzell
