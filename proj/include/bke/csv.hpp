#pragma once

#include "bke/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace bke {

/// Malformed or non-numeric input file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;  ///< empty when the file had none
  Matrix values;
};

/// Comma-separated numeric table, one observation per row. A first row with
/// any non-numeric field is taken as a header. Ragged rows, empty files and
/// non-finite values raise DataError.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_csv(const std::vector<std::string>& header, const Eigen::Ref<const Matrix>& values);

/// Write via a temporary file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace bke
