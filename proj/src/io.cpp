#include "wentzell/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "wentzell/errors.hpp"

namespace wentzell {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // normalize negative zero
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw error("failed writing " + path);
}

std::string coordinate_format(const Eigen::SparseMatrix<double>& m) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> rm(m);
  std::string out;
  for (int k = 0; k < rm.outerSize(); ++k)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, k); it;
         ++it) {
      out += std::to_string(it.row()) + " " + std::to_string(it.col()) + " " +
             format_double(it.value()) + "\n";
    }
  return out;
}

std::string coordinate_format(const Eigen::MatrixXd& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        out += std::to_string(i) + " " + std::to_string(j) + " " +
               format_double(m(i, j)) + "\n";
  return out;
}

namespace {

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

std::string tick_label(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel,
                     const std::vector<PlotSeries>& series) {
  const double width = 720, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  static const char* palette[] = {"#1f6fb4", "#d45500", "#2ca02c", "#9467bd",
                                  "#8c564b"};

  Extent ex, ey;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      ex.absorb(s.x[i]);
      ey.absorb(s.y[i]);
    }
  if (!(ex.lo <= ex.hi)) {
    ex.lo = 0;
    ex.hi = 1;
  }
  if (!(ey.lo <= ey.hi)) {
    ey.lo = 0;
    ey.hi = 1;
  }
  if (ey.hi == ey.lo) {
    ey.lo -= 0.5;
    ey.hi += 0.5;
  }
  if (ex.hi == ex.lo) {
    ex.lo -= 0.5;
    ex.hi += 0.5;
  }

  auto px = [&](double x) { return ml + (x - ex.lo) / ex.span() * (width - ml - mr); };
  auto py = [&](double y) {
    return height - mb - (y - ey.lo) / ey.span() * (height - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         format_double(width) + " " + format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";

  // Axes and ticks.
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(height - mb) +
         "\" x2=\"" + format_double(width - mr) + "\" y2=\"" +
         format_double(height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) +
         "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(height - mb) +
         "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = ex.lo + ex.span() * t / 5.0;
    const double yv = ey.lo + ey.span() * t / 5.0;
    svg += "<line x1=\"" + format_double(px(xv)) + "\" y1=\"" +
           format_double(height - mb) + "\" x2=\"" + format_double(px(xv)) +
           "\" y2=\"" + format_double(height - mb + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(px(xv)) + "\" y=\"" +
           format_double(height - mb + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(xv) + "</text>\n";
    svg += "<line x1=\"" + format_double(ml - 5) + "\" y1=\"" + format_double(py(yv)) +
           "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(py(yv)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" +
           format_double(py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + format_double((ml + width - mr) / 2) + "\" y=\"" +
         format_double(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         xlabel + "</text>\n";
  svg += "<text x=\"16\" y=\"" + format_double((mt + height - mb) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 " + format_double((mt + height - mb) / 2) +
         ")\">" + ylabel + "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    if (ser.x.empty()) continue;
    std::string pts;
    for (size_t i = 0; i < ser.x.size(); ++i) {
      pts += format_double(px(ser.x[i])) + "," + format_double(py(ser.y[i]));
      if (i + 1 < ser.x.size()) pts += " ";
    }
    const char* color = palette[s % 5];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    if (!ser.label.empty()) {
      const double ly = mt + 16.0 * (s + 1);
      svg += "<line x1=\"" + format_double(width - mr - 110) + "\" y1=\"" +
             format_double(ly - 4) + "\" x2=\"" + format_double(width - mr - 90) +
             "\" y2=\"" + format_double(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + format_double(width - mr - 84) + "\" y=\"" +
             format_double(ly) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + ser.label +
             "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

PlotSeries staircase(const std::string& label, const Eigen::VectorXd& values) {
  PlotSeries out;
  out.label = label;
  for (int i = 0; i < values.size(); ++i) {
    out.x.push_back(i + 1);
    out.y.push_back(values(i));
    out.x.push_back(i + 2);
    out.y.push_back(values(i));
  }
  return out;
}

}  // namespace wentzell
