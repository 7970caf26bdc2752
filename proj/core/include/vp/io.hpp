#pragma once
#include <filesystem>
#include <string>
#include <vector>

#include "vp/grid.hpp"

namespace vp {

// CSV with a header row, 17-significant-digit floats, LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  std::string buffer_;
  std::filesystem::path path_;
  std::size_t columns_ = 0;
  void flush_line(const std::string& line);
};

// Flat binary dump of a full-grid scalar: 64-bit floats, x-fastest order,
// plus a JSON sidecar carrying dims, spacing, origin and time.
void dump_grid_scalar(const std::filesystem::path& base_path, const GridSpec& spec,
                      const std::vector<double>& values, double time);

}  // namespace vp
