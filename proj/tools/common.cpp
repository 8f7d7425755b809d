#include "common.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "spectralens/errors.hpp"
#include "spectralens/report.hpp"
#include "spectralens/svg.hpp"
#include "spectralens/theory.hpp"

namespace cli {

using namespace spectralens;

void Outputs::flush() const {
    for (const auto& [path, bytes] : files_) {
        if (path.has_parent_path()) {
            fs::create_directories(path.parent_path());
        }
        io::write_atomically(path, bytes);
    }
}

json Run::report() const {
    json doc = report::skeleton(command);
    doc["config"] = config;
    return doc;
}

double Run::elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

namespace {
// Option text as a typed JSON value: numbers stay numbers.
json typed(const std::string& s) {
    const auto* end = s.data() + s.size();
    if (std::int64_t i = 0; !s.empty() && std::from_chars(s.data(), end, i).ptr == end) {
        return i;
    }
    if (std::uint64_t u = 0; !s.empty() && std::from_chars(s.data(), end, u).ptr == end) {
        return u;
    }
    double v = 0;
    const auto res = std::from_chars(s.data(), end, v);
    if (!s.empty() && res.ec == std::errc{} && res.ptr == end && std::isfinite(v)) {
        return v;
    }
    return s;
}
}  // namespace

json effective_config(const CLI::App& app) {
    json cfg = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") {
            continue;
        }
        const std::string name = opt->get_lnames().front();
        if (opt->get_expected_max() == 0) {  // flag
            cfg[name] = opt->count() > 0;
            continue;
        }
        if (opt->count() > 0) {
            const auto& res = opt->results();
            if (res.size() == 1) {
                cfg[name] = typed(res.front());
            } else {
                json list = json::array();
                for (const auto& r : res) {
                    list.push_back(typed(r));
                }
                cfg[name] = list;
            }
        } else {
            cfg[name] = typed(opt->get_default_str());
        }
    }
    return cfg;
}

namespace {
double parse_double(const std::string& s) {
    double v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("not a number: '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        parts.push_back(item);
    }
    return parts;
}
}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() == 4 && (parts[0] == "log" || parts[0] == "lin")) {
        const double lo = parse_double(parts[1]), hi = parse_double(parts[2]);
        const double n = parse_double(parts[3]);
        if (!(n >= 2) || n != std::floor(n) || !(hi > lo) || (parts[0] == "log" && !(lo > 0))) {
            throw InvalidArgument("bad grid '" + spec + "'");
        }
        std::vector<double> g;
        const auto count = static_cast<int>(n);
        for (int k = 0; k < count; ++k) {
            const double f = static_cast<double>(k) / (count - 1);
            g.push_back(parts[0] == "log" ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                                          : lo + f * (hi - lo));
        }
        return g;
    }
    std::vector<double> g;
    for (const auto& p : split(spec, ',')) {
        g.push_back(parse_double(p));
    }
    if (g.empty()) {
        throw InvalidArgument("empty grid '" + spec + "'");
    }
    return g;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

io::CsvLayout parse_layout(const std::string& s) {
    if (s == "rows") {
        return io::CsvLayout::SamplesAsRows;
    }
    if (s == "columns") {
        return io::CsvLayout::SamplesAsColumns;
    }
    throw InvalidArgument("csv layout must be 'rows' or 'columns'");
}

Analysis analyze(const DataMatrixD& x, const BulkOptions& bulk, bool do_unfold) {
    Analysis a;
    a.spectrum = detect_bulk(eigenvalues(gram(x), x.M()), bulk);
    a.fit = fit_power_law(a.spectrum);
    a.entropy = spectral_entropy(a.spectrum);
    a.r = r_statistics(a.spectrum);
    if (do_unfold && a.spectrum.bulk_range()->size() >= 100) {
        a.unfolding = unfold(a.spectrum);
        a.spacing = level_spacing(a.unfolding);
        a.ks_wigner = ks_distance(a.spacing.spacings, wigner_surmise_cdf);
        a.unfolded = true;
    }
    return a;
}

json to_json(const Analysis& a) {
    json j = {{"d", a.spectrum.d()},
              {"M", a.spectrum.M()},
              {"bulk_range", report::to_json(*a.spectrum.bulk_range())},
              {"power_law", report::to_json(a.fit)},
              {"entropy", report::number(a.entropy)},
              {"r_statistics", report::to_json(a.r)}};
    if (a.unfolded) {
        j["unfolding"] = {{"mean_spacing", report::number(a.unfolding.mean_spacing)},
                          {"quality_ok", a.unfolding.quality_ok},
                          {"ks_to_wigner_surmise", report::number(a.ks_wigner)},
                          {"spacing_histogram", report::to_json(a.spacing.histogram)}};
    }
    return j;
}

void add_scree(Outputs& out, const fs::path& stem, const std::vector<std::string>& names,
               const std::vector<const SpectrumD*>& spectra, const std::string& title) {
    std::vector<std::string> header{"index"};
    std::vector<std::vector<double>> cols(1);
    Eigen::Index n = 0;
    for (const auto* s : spectra) {
        n = std::max(n, s->d());
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
        cols[0].push_back(static_cast<double>(i));
    }
    svg::Plot plot{title, "index i", "eigenvalue", true, true};
    for (std::size_t k = 0; k < spectra.size(); ++k) {
        header.push_back(names[k]);
        std::vector<double> v(static_cast<std::size_t>(n), std::nan(""));
        for (Eigen::Index i = 0; i < spectra[k]->d(); ++i) {
            v[static_cast<std::size_t>(i)] = spectra[k]->eigenvalues()(i);
        }
        plot.add({names[k], cols[0], v, svg::Style::Line});
        cols.push_back(std::move(v));
    }
    out.add(fs::path(stem).concat(".csv"), report::csv_text(header, cols));
    out.add(fs::path(stem).concat(".svg"), plot.render());
}

}  // namespace cli
