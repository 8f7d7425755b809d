#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectralens/datamatrix.hpp"
#include "spectralens/io.hpp"
#include "spectralens/rmtstats.hpp"
#include "spectralens/spectra.hpp"

namespace cli {

using nlohmann::json;
namespace fs = std::filesystem;

/// Files are staged in memory and written only once the whole command has
/// succeeded, so a failure leaves nothing behind.
class Outputs {
public:
    void add(fs::path path, std::string bytes) { files_.emplace_back(std::move(path), std::move(bytes)); }
    void flush() const;
    [[nodiscard]] const std::vector<std::pair<fs::path, std::string>>& files() const { return files_; }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

struct Run {
    std::string command;
    json config;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    Outputs outputs;

    /// Report skeleton with the effective configuration and seed record.
    [[nodiscard]] json report() const;
    [[nodiscard]] double elapsed() const;
};

/// Every long option of a (sub)command with its resolved value.
json effective_config(const CLI::App& app);

/// "log:LO:HI:N", "lin:LO:HI:N" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec);

std::vector<double> to_std(const Eigen::VectorXd& v);

spectralens::io::CsvLayout parse_layout(const std::string& s);

struct Analysis {
    spectralens::SpectrumD spectrum;
    spectralens::PowerLawFit<double> fit;
    double entropy = 0.0;
    spectralens::RStatistics r;
    bool unfolded = false;
    spectralens::UnfoldedSpectrum unfolding;
    spectralens::SpacingSample spacing;
    double ks_wigner = 0.0;
};

/// Gram spectrum, bulk, power-law fit, entropy, r-statistics and unfolded
/// spacings of a preprocessed data matrix.
Analysis analyze(const spectralens::DataMatrixD& x, const spectralens::BulkOptions& bulk, bool unfold = true);

json to_json(const Analysis& a);

/// Scree CSV/SVG for a set of named spectra.
void add_scree(Outputs& out, const fs::path& stem, const std::vector<std::string>& names,
               const std::vector<const spectralens::SpectrumD*>& spectra, const std::string& title);

struct Command {
    CLI::App* app = nullptr;
    std::function<void(Run&)> run;
};

void register_commands(CLI::App& app, std::vector<Command>& commands);
void register_figures(CLI::App& app, std::vector<Command>& commands);

}  // namespace cli
