#include "logibeta/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace logibeta {

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CsvError(file, -1, "cannot open file");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw CsvError(file, -1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_line(line);
  const auto ncol = table.header.size();
  if (ncol == 0) throw CsvError(file, 1, "empty header");

  std::vector<double> data;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != ncol) {
      throw CsvError(file, row,
                     "expected " + std::to_string(ncol) + " columns, got " +
                         std::to_string(cells.size()));
    }
    for (const auto& cell : cells) {
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end) {
        throw CsvError(file, row, "cannot parse numeric value '" + cell + "'");
      }
      data.push_back(v);
    }
  }
  const long nrow = static_cast<long>(data.size() / ncol);
  table.values.resize(nrow, static_cast<long>(ncol));
  for (long i = 0; i < nrow; ++i) {
    for (std::size_t j = 0; j < ncol; ++j) table.values(i, j) = data[i * ncol + j];
  }
  return table;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  if (!file.parent_path().empty()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw CsvError(file, -1, "cannot open file for writing");
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << header[j] << (j + 1 < header.size() ? "," : "");
  }
  out << "\n";
  char buf[40];
  for (long i = 0; i < values.rows(); ++i) {
    for (long j = 0; j < values.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(i, j));
      out << buf << (j + 1 < values.cols() ? "," : "");
    }
    out << "\n";
  }
  if (!out) throw CsvError(file, -1, "write failed");
}

}  // namespace logibeta
