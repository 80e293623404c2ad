#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

namespace mflab {

struct CsvProvenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool assumption_override = false;
};

/// The comment line written above every header row.
std::string provenance_line(const CsvProvenance& p);

/// Writes `# mflab ...` then the header row, then one row per call.
/// Doubles are printed with 12 significant digits.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const CsvProvenance& prov,
            std::initializer_list<const char*> columns);

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((put(values, first)), ...);
    out_ << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

private:
  template <class T>
  void put(const T& v, bool& first) {
    if (!first) {
      out_ << ',';
    }
    first = false;
    out_ << v;
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

} // namespace mflab
