#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mvfbm/study.hpp"

namespace mvfbm {

/// Version written as the first line of every CSV report.
inline constexpr int kCsvSchemaVersion = 1;

// CSV reports: `# schema_version=1`, then `# key=value` metadata lines, then
// a header row and numeric rows. Numbers use the shortest round-trip form so that
// identical runs produce byte-identical files.
void write_csv(const ConvergenceReport& report, std::ostream& out);
void write_csv(const ChaosReport& report, std::ostream& out);
void write_csv(const MomentReport& report, std::ostream& out);
void write_csv(const FbmCheckReport& report, std::ostream& out);

std::string to_json(const ConvergenceReport& report);
std::string to_json(const ChaosReport& report);
std::string to_json(const MomentReport& report);
std::string to_json(const FbmCheckReport& report);

/// Log-log chart of RMS error against step size with the fitted line and a
/// reference line of slope H through the first point.
void write_svg(const ConvergenceReport& report, std::ostream& out);

struct CsvDocument {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parses a CSV report. Throws ConfigError when the first line is not a
/// supported `# schema_version=` line or a row is malformed.
CsvDocument read_csv(std::istream& in);

}  // namespace mvfbm
