#include "vp/io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path_.string() + " for writing");
}

void CsvWriter::flush_line(const std::string& line) {
  buffer_ += line;
  buffer_ += "\n";
  if (buffer_.size() > (1u << 20)) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << buffer_;
    buffer_.clear();
  }
}

CsvWriter::~CsvWriter() {
  if (!buffer_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << buffer_;
  }
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  columns_ = columns.size();
  std::string line;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) line += ",";
    line += columns[i];
  }
  flush_line(line);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ",";
    line += format_g17(values[i]);
  }
  flush_line(line);
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ",";
    line += cells[i];
  }
  flush_line(line);
}

void dump_grid_scalar(const std::filesystem::path& base_path, const GridSpec& spec,
                      const std::vector<double>& values, double time) {
  {
    std::ofstream bin(base_path.string() + ".f64", std::ios::binary | std::ios::trunc);
    if (!bin) throw Error("cannot open " + base_path.string() + ".f64 for writing");
    bin.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  nlohmann::json meta;
  meta["dims"] = {spec.n[0], spec.n[1], spec.n[2]};
  meta["h"] = spec.h;
  meta["origin"] = {spec.origin.x, spec.origin.y, spec.origin.z};
  meta["time"] = time;
  meta["order"] = "x-fastest";
  meta["dtype"] = "float64";
  std::ofstream side(base_path.string() + ".json", std::ios::binary | std::ios::trunc);
  side << meta.dump(2) << "\n";
}

}  // namespace vp
