#pragma once

#include "hidimcov/model.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace hdcov {

/// Writes through a sibling temp file, then renames over `path`.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer, bool binary = false);

/// Binary layout: "HDCV", version byte, LE u64 n, u64 d, u64 seed, row-major f64.
inline constexpr unsigned char kPanelFormatVersion = 1;

void write_panel_binary(std::ostream& out, const SeriesPanel& panel);
SeriesPanel read_panel_binary(std::istream& in);

/// CSV with header y1,...,yd and one row per time index.
void write_panel_csv(std::ostream& out, const SeriesPanel& panel);
SeriesPanel read_panel_csv(std::istream& in);

/// Dispatches on extension: ".csv" is CSV, anything else the binary format.
void save_panel(const std::filesystem::path& path, const SeriesPanel& panel);
SeriesPanel load_panel(const std::filesystem::path& path);

/// Row-major CSV without header, 17 significant digits.
void write_matrix_csv(std::ostream& out, const MatrixXd& m);
MatrixXd read_matrix_csv(std::istream& in);
void save_matrix_csv(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd load_matrix_csv(const std::filesystem::path& path);

std::string format_double(double x);

}  // namespace hdcov
