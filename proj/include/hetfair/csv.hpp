#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hetfair {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column index by name; throws std::runtime_error if absent.
  std::size_t column(const std::string& name) const;
  std::optional<std::size_t> find_column(const std::string& name) const;
};

/// Reads a delimited file with a header row. With `delim == 0` the delimiter
/// is sniffed from the header (tab, then comma, then whitespace).
CsvTable read_csv(const std::filesystem::path& path, char delim = 0);

/// Writes rows to a file, creating parent directories. Fields are emitted
/// verbatim; callers must not pass fields containing the delimiter.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path, char delim = ',');

  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  char delim_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hetfair
