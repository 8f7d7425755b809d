#include "spectralens/report.hpp"

#include <charconv>
#include <cmath>

#include "spectralens/errors.hpp"
#include "spectralens/io.hpp"

namespace spectralens::report {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(number(x));
    }
    return a;
}

json to_json(const IndexRange& r) { return json::array({r.start, r.end}); }

json to_json(const PowerLawFit<double>& f) {
    return {{"alpha", number(f.alpha)},
            {"amplitude", number(f.amplitude)},
            {"r_squared", number(f.r_squared)},
            {"fit_range", to_json(f.fit_range)}};
}

json to_json(const DensityHistogram& h) {
    return {{"normalization", h.normalization == HistogramNormalization::MaxScaled ? "max-scaled" : "raw"},
            {"bin_edges", numbers(h.edges)},
            {"masses", numbers(h.masses)}};
}

json to_json(const RStatistics& r, bool include_values) {
    json j = {{"mean", number(r.mean)}, {"count", r.values.size()}, {"histogram", to_json(r.histogram)}};
    if (include_values) {
        j["values"] = numbers(r.values);
    }
    return j;
}

json to_json(const SffCurve& c) {
    return {{"taus", numbers(c.taus)},
            {"values", numbers(c.values)},
            {"normalization", number(c.normalization)},
            {"members", c.members}};
}

json skeleton(const std::string& command) {
    return {{"schema_version", kSchemaVersion}, {"tool", "spectralens"}, {"tool_version", kToolVersion},
            {"command", command}};
}

void write_json(const std::filesystem::path& path, const json& doc) { io::write_atomically(path, doc.dump(2) + "\n"); }

namespace {
void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "nan";
        return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}
}  // namespace

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) {
        throw InvalidArgument("csv: header and column counts differ");
    }
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != rows) {
            throw InvalidArgument("csv: columns have different lengths");
        }
    }
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k) {
        out += (k ? "," : "") + header[k];
    }
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (k) {
                out += ',';
            }
            append_number(out, columns[k][r]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    io::write_atomically(path, csv_text(header, columns));
}

}  // namespace spectralens::report
