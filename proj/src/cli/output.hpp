#pragma once

#include "mfpg/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mfpg::cli {

// %.17g, with nan/inf spelled the same on every platform.
std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::size_t columns_;
  std::string text_;
};

std::string dump_json(const Json& doc);

/// Writes JSON to `path` if given, else to `out`.
void emit_json(const Json& doc, const std::string& path, std::ostream& out);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace mfpg::cli
