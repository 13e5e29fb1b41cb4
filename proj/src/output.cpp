#include "rdlab/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <stdexcept>

namespace rdlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const ExperimentConfig& cfg,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << "# seed=" << cfg.seed << " preset=" << cfg.preset << " dt=" << format_number(cfg.dt)
       << " N=" << cfg.grid_n << " M=" << cfg.modes() << " config_hash=" << config_hash(cfg)
       << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (in_row_ == columns_) throw std::logic_error("csv row too long: " + path_.string());
  out_ << (in_row_++ ? "," : "") << v;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_number(v)); }
CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(bool v) { return cell(std::string(v ? "1" : "0")); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv row too short: " + path_.string());
  out_ << "\n";
  in_row_ = 0;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                    const std::string& subcommand, const std::vector<std::string>& files) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << "subcommand=" << subcommand << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "config_hash=" << config_hash(cfg) << "\n";
  out << "rdlab_version=0.1.0\n";
  out << "config=" << canonical_json(cfg) << "\n";
  for (const auto& f : files) out << "file=" << f << "\n";
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "timestamp=" << stamp << "\n";
}

}  // namespace rdlab
