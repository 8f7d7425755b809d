#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectralens/rmtstats.hpp"
#include "spectralens/spectra.hpp"

namespace spectralens::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Non-finite numbers become null so the document stays valid JSON.
json number(double v);
json numbers(const std::vector<double>& v);

json to_json(const IndexRange& r);
json to_json(const PowerLawFit<double>& f);
json to_json(const DensityHistogram& h);
json to_json(const RStatistics& r, bool include_values = false);
json to_json(const SffCurve& c);

/// Empty report skeleton with schema and tool version.
json skeleton(const std::string& command);

void write_json(const std::filesystem::path& path, const json& doc);

/// Column-oriented CSV with a header row; columns must have equal length.
std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace spectralens::report
