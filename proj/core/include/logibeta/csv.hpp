#ifndef LOGIBETA_CSV_HPP
#define LOGIBETA_CSV_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace logibeta {

// Data-file error carrying file and row context.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::filesystem::path& file, long row, const std::string& what)
      : std::runtime_error(file.string() + (row >= 0 ? ":" + std::to_string(row) : "") + ": " +
                           what) {}
};

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& file);

// Values are written with round-trip precision so identical numbers give
// byte-identical files.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

}  // namespace logibeta

#endif
