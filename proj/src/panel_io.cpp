#include "hidimcov/panel_io.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>
#include <vector>

namespace hdcov {

namespace fs = std::filesystem;

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& writer,
                      bool binary) {
  if (path.has_parent_path() && !path.parent_path().empty()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary panel format assumes little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("panel: truncated header");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("csv: cannot parse number '" + s + "'");
  }
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
  if (pos != s.size()) throw std::runtime_error("csv: trailing characters in '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_panel_binary(std::ostream& out, const SeriesPanel& panel) {
  out.write("HDCV", 4);
  out.put(static_cast<char>(kPanelFormatVersion));
  put_u64(out, static_cast<std::uint64_t>(panel.n()));
  put_u64(out, static_cast<std::uint64_t>(panel.d()));
  put_u64(out, panel.seed);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = panel.data;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows.size())));
}

SeriesPanel read_panel_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || std::memcmp(magic.data(), "HDCV", 4) != 0) throw std::runtime_error("panel: bad magic");
  const int version = in.get();
  if (version != kPanelFormatVersion) throw std::runtime_error("panel: unsupported version");
  const auto n = static_cast<Index>(get_u64(in));
  const auto d = static_cast<Index>(get_u64(in));
  SeriesPanel panel;
  panel.seed = get_u64(in);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, d);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rows.size())));
  if (!in) throw std::runtime_error("panel: truncated data");
  panel.data = rows;
  if (!panel.data.allFinite()) throw std::runtime_error("panel: non-finite entries");
  return panel;
}

void write_panel_csv(std::ostream& out, const SeriesPanel& panel) {
  for (Index j = 0; j < panel.d(); ++j) out << (j ? "," : "") << 'y' << (j + 1);
  out << '\n';
  for (Index i = 0; i < panel.n(); ++i) {
    for (Index j = 0; j < panel.d(); ++j) out << (j ? "," : "") << format_double(panel.data(i, j));
    out << '\n';
  }
}

SeriesPanel read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("panel csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const auto d = static_cast<Index>(header.size());
  for (Index j = 0; j < d; ++j)
    if (header[j] != "y" + std::to_string(j + 1)) throw std::runtime_error("panel csv: bad header");
  std::vector<double> values;
  Index n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != d) throw std::runtime_error("panel csv: ragged row");
    for (const auto& f : fields) values.push_back(parse_double(f));
    ++n;
  }
  SeriesPanel panel;
  panel.data = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  if (!panel.data.allFinite()) throw std::runtime_error("panel csv: non-finite entries");
  return panel;
}

void save_panel(const fs::path& path, const SeriesPanel& panel) {
  if (path.extension() == ".csv")
    write_atomically(path, [&](std::ostream& o) { write_panel_csv(o, panel); });
  else
    write_atomically(path, [&](std::ostream& o) { write_panel_binary(o, panel); }, true);
}

SeriesPanel load_panel(const fs::path& path) {
  const bool csv = path.extension() == ".csv";
  std::ifstream in(path, csv ? std::ios::in : std::ios::binary);
  if (!in) throw std::runtime_error("cannot open panel " + path.string());
  return csv ? read_panel_csv(in) : read_panel_binary(in);
}

void write_matrix_csv(std::ostream& out, const MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

MatrixXd read_matrix_csv(std::istream& in) {
  std::string line;
  std::vector<double> values;
  Index rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (cols < 0) cols = static_cast<Index>(fields.size());
    if (static_cast<Index>(fields.size()) != cols) throw std::runtime_error("matrix csv: ragged row");
    for (const auto& f : fields) values.push_back(parse_double(f));
    ++rows;
  }
  if (rows == 0) return MatrixXd();
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, cols);
}

void save_matrix_csv(const fs::path& path, const MatrixXd& m) {
  write_atomically(path, [&](std::ostream& o) { write_matrix_csv(o, m); });
}

MatrixXd load_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix " + path.string());
  return read_matrix_csv(in);
}

}  // namespace hdcov
