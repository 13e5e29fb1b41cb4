#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rdlab/config.hpp"

namespace rdlab {

/// Shortest text that parses back to the same double.
std::string format_number(double v);

/// CSV file with '#'-prefixed run metadata lines followed by one column header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ExperimentConfig& cfg,
            const std::vector<std::string>& columns);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(bool v);
  void end_row();
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

/// Writes manifest.txt: seed, config hash, canonical config, produced files and a timestamp line.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                    const std::string& subcommand, const std::vector<std::string>& files);

}  // namespace rdlab
