#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jumpfilter {

/// Deterministic CSV artifact writer: '#' metadata lines (config hash, seed)
/// followed by a header row and %.17g-formatted numeric rows.
class CsvWriter {
 public:
  CsvWriter(std::string path, std::uint64_t config_hash, std::uint64_t seed);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void comment(const std::string& text);
  /// Writes the buffered content to disk; returns the rendered bytes.
  std::string flush();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::string buffer_;
};

std::string format_g17(double v);

/// Write a string to a file, creating parent directories.
void write_file(const std::string& path, const std::string& content);

class ParticleMeasure;

/// Atom-list CSV exchange format (columns: x_1..x_d, w).
void write_measure_csv(const std::string& path, const ParticleMeasure& mu,
                       std::uint64_t config_hash, std::uint64_t seed);
ParticleMeasure read_measure_csv(const std::string& path);

}  // namespace jumpfilter
