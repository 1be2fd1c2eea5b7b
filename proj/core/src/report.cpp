#include "jumpfilter/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jumpfilter/errors.hpp"
#include "jumpfilter/measure.hpp"

namespace jumpfilter {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
}

CsvWriter::CsvWriter(std::string path, std::uint64_t config_hash,
                     std::uint64_t seed)
    : path_(std::move(path)) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash));
  buffer_ += std::string("# config_hash=") + buf + "\n";
  buffer_ += "# seed=" + std::to_string(seed) + "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_g17(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::comment(const std::string& text) {
  buffer_ += "# " + text + "\n";
}

std::string CsvWriter::flush() {
  write_file(path_, buffer_);
  return buffer_;
}

void write_measure_csv(const std::string& path, const ParticleMeasure& mu,
                       std::uint64_t config_hash, std::uint64_t seed) {
  CsvWriter csv(path, config_hash, seed);
  std::vector<std::string> cols;
  for (int j = 0; j < mu.dim(); ++j) cols.push_back("x_" + std::to_string(j + 1));
  cols.push_back("w");
  csv.header(cols);
  std::vector<double> row(mu.dim() + 1);
  for (const auto& a : mu.atoms()) {
    for (int j = 0; j < mu.dim(); ++j) row[j] = a.x[j];
    row[mu.dim()] = a.w;
    csv.row(row);
  }
  csv.flush();
}

ParticleMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open measure CSV: " + path);
  std::string line;
  int dim = -1;
  std::vector<std::pair<std::vector<double>, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (dim < 0) {
      // Header row: x_1..x_d,w.
      dim = static_cast<int>(std::count(line.begin(), line.end(), ',') + 1) - 1;
      if (dim < 1) throw Error(path + ": malformed measure CSV header");
      continue;
    }
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != dim + 1)
      throw Error(path + ": row width does not match header");
    rows.emplace_back(std::vector<double>(vals.begin(), vals.end() - 1), vals.back());
  }
  if (dim < 1) throw Error(path + ": no header found");
  ParticleMeasure mu(dim);
  for (const auto& [x, w] : rows) {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = x[j];
    mu.add(v, w);
  }
  return mu;
}

}  // namespace jumpfilter
