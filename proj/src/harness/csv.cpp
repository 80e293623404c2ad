#include "mflab/harness/csv.hpp"

#include <stdexcept>

namespace mflab {

std::string provenance_line(const CsvProvenance& p) {
  std::string s = "# mflab " + p.command + " config_hash=" + p.config_hash +
                  " seed=" + std::to_string(p.seed);
  if (p.assumption_override) {
    s += " assumption_override=1";
  }
  return s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const CsvProvenance& prov,
                     std::initializer_list<const char*> columns)
    : path_(path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path);
  if (!out_) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out_.precision(12);
  out_ << provenance_line(prov) << '\n';
  bool first = true;
  for (const char* c : columns) {
    out_ << (first ? "" : ",") << c;
    first = false;
  }
  out_ << '\n';
}

} // namespace mflab
