#pragma once

#include <string>
#include <vector>

namespace stablestein {

/// %.12g, with nan and inf spelled out.
std::string format_number(double v);

/// In-memory CSV table; the first row is the header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  void add_numeric_row(const std::vector<double>& cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;
  /// Throws std::runtime_error if the file cannot be written.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 640;
  int height = 420;
};

/// Minimal standalone SVG line plot. Non-positive values are skipped on log axes.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt);
void write_text(const std::string& path, const std::string& text);

}  // namespace stablestein
