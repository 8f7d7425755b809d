#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "spectralens/convergence.hpp"
#include "spectralens/errors.hpp"
#include "spectralens/report.hpp"
#include "spectralens/svg.hpp"
#include "spectralens/synth.hpp"
#include "spectralens/teacher_student.hpp"
#include "spectralens/theory.hpp"

namespace cli {

using namespace spectralens;

namespace {

// Rough single-core throughput used for the printed runtime budget.
constexpr double kFlopsPerSecond = 4e9;

void print_budget(const std::string& name, double flops) {
    const double seconds = flops / kFlopsPerSecond / std::max(1u, thread_count());
    std::cout << name << ": estimated runtime " << std::fixed << std::setprecision(0) << std::max(1.0, seconds)
              << " s on " << thread_count() << " thread(s)\n"
              << std::defaultfloat << std::setprecision(6);
}

double gram_flops(double d, double m) { return d * d * m + 4.0 * d * d * d; }

DataMatrixD cgd(Eigen::Index d, Eigen::Index m, double c, double alpha, RngSeed seed) {
    return preprocess(sample_gaussian(PopulationCovariance<double>::toeplitz(d, c, alpha), m, seed), false);
}

DataMatrixD ugd(Eigen::Index d, Eigen::Index m, RngSeed seed) {
    return preprocess(sample_gaussian(PopulationCovariance<double>::identity(d, 1.0), m, seed), false);
}

/// Options every figure shares.
struct FigureOpts {
    std::string out_dir;
    std::string data;
    bool synthetic_only = false;
    bool standardize = false;
    std::uint64_t seed = 0;

    void bind(CLI::App* sub, bool accepts_data) {
        sub->add_option("--out-dir", out_dir, "directory for the figure artifacts")->required();
        if (accepts_data) {
            auto* data_opt = sub->add_option("--data", data, "real dataset (IDX, GRM1 or CSV)")
                                 ->check(CLI::ExistingFile);
            auto* syn = sub->add_flag("--synthetic-only", synthetic_only, "use CGD surrogates only");
            data_opt->excludes(syn);
            sub->add_flag("--standardize", standardize, "standardize the real dataset after centering");
        }
        sub->add_option("--seed", seed, "random seed");
    }
    [[nodiscard]] bool has_data() const { return !data.empty(); }
    [[nodiscard]] RngSeed rng(std::uint64_t tag) const { return RngSeed{seed, 0}.derive(tag); }
    [[nodiscard]] fs::path path(const std::string& name) const { return fs::path(out_dir) / name; }
    [[nodiscard]] DataMatrixD load() const { return preprocess(io::load_any(data), standardize); }
};

void finish(Run& run, const FigureOpts& o, json doc) {
    doc["wall_time_s"] = run.elapsed();
    run.outputs.add(o.path("report.json"), doc.dump(2) + "\n");
}

std::vector<double> bars_x(const DensityHistogram& h) {
    std::vector<double> v;
    for (std::size_t k = 0; k < h.bins(); ++k) {
        v.push_back(h.center(k));
    }
    return v;
}

std::vector<double> bars_y(const DensityHistogram& h) {
    std::vector<double> v;
    for (std::size_t k = 0; k < h.bins(); ++k) {
        v.push_back(h.density(k));
    }
    return v;
}

void fig1_scree(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 784;
        Eigen::Index m = 20000;
        double alpha = 0.25;
        std::vector<double> fractions{0.0, 0.25, 0.5, 0.75, 1.0};
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("fig1-scree", "scree plots and the noise-corruption sweep of the fitted alpha");
    o->f.bind(sub, true);
    sub->add_option("--d", o->d, "surrogate features")->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m, "surrogate samples")->check(CLI::Range(Eigen::Index{64}, Eigen::Index{60000}));
    sub->add_option("--alpha", o->alpha, "surrogate exponent");
    sub->add_option("--fractions", o->fractions, "noise fractions")->delimiter(',');
    commands.push_back({sub, [o](Run& run) {
                            for (double f : o->fractions) {
                                if (!(f >= 0 && f <= 1)) {
                                    throw InvalidArgument("noise fractions must lie in [0, 1]");
                                }
                            }
                            const double d = o->f.has_data() ? 784.0 : static_cast<double>(o->d);
                            const double m = o->f.has_data() ? 60000.0 : static_cast<double>(o->m);
                            print_budget("fig1-scree", (o->fractions.size() + 1) * gram_flops(d, m));
                            const DataMatrixD x = o->f.has_data() ? o->f.load() : cgd(o->d, o->m, 1.0, o->alpha,
                                                                                       o->f.rng(1));
                            const std::string label = o->f.has_data() ? "data" : "CGD surrogate";
                            const Analysis base = analyze(x, {}, false);
                            const Analysis ref = analyze(ugd(x.d(), x.M(), o->f.rng(2)), {}, false);
                            add_scree(run.outputs, o->f.path("scree"), {label, "UGD"}, {&base.spectrum, &ref.spectrum},
                                      "scree");

                            std::vector<double> alphas, r2;
                            std::vector<Analysis> sweep;
                            for (std::size_t k = 0; k < o->fractions.size(); ++k) {
                                const auto noisy =
                                    preprocess(corrupt_with_noise(x, o->fractions[k], o->f.rng(10 + k)), false);
                                sweep.push_back(analyze(noisy, {}, false));
                                alphas.push_back(sweep.back().fit.alpha);
                                r2.push_back(sweep.back().fit.r_squared);
                            }
                            run.outputs.add(o->f.path("corruption.csv"),
                                            report::csv_text({"noise_fraction", "alpha", "r_squared"},
                                                             {o->fractions, alphas, r2}));
                            svg::Plot p{"fitted alpha under noise corruption", "noise fraction", "alpha"};
                            p.add({label, o->fractions, alphas, svg::Style::Points});
                            run.outputs.add(o->f.path("corruption.svg"), p.render());

                            bool monotone = true;
                            for (std::size_t k = 1; k < alphas.size(); ++k) {
                                monotone = monotone && alphas[k] < alphas[k - 1];
                            }
                            json doc = run.report();
                            doc["dataset"] = {{"label", label}, {"source", x.source()}, {"d", x.d()}, {"M", x.M()}};
                            doc["spectrum"] = to_json(base);
                            doc["ugd_reference"] = to_json(ref);
                            doc["corruption"] = {{"fractions", o->fractions},
                                                 {"alpha", report::numbers(alphas)},
                                                 {"r_squared", report::numbers(r2)},
                                                 {"strictly_decreasing", monotone}};
                            finish(run, o->f, doc);
                            std::cout << "fig1-scree: alpha(" << label << ")=" << base.fit.alpha
                                      << ", alpha(UGD)=" << ref.fit.alpha << "; corruption sweep";
                            for (double a : alphas) {
                                std::cout << " " << a;
                            }
                            std::cout << (monotone ? " (strictly decreasing)\n" : " (not monotone)\n");
                        }});
}

void fig2_density(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 1000;
        Eigen::Index m = 50000;
        std::vector<double> alphas{0.0, 0.25, 0.5};
        std::size_t bins = 64;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("fig2-density", "bulk power laws and eigenvalue densities of CGD and UGD");
    o->f.bind(sub, false);
    sub->add_option("--d", o->d)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{60000}));
    sub->add_option("--alphas", o->alphas, "CGD exponents")->delimiter(',');
    sub->add_option("--bins", o->bins)->check(CLI::Range(2, 10000));
    commands.push_back({sub, [o](Run& run) {
                            print_budget("fig2-density",
                                         (o->alphas.size() + 1) * gram_flops(static_cast<double>(o->d),
                                                                             static_cast<double>(o->m)));
                            std::vector<std::string> names;
                            std::vector<Analysis> res;
                            for (std::size_t k = 0; k < o->alphas.size(); ++k) {
                                names.push_back("CGD alpha=" + report::number(o->alphas[k]).dump());
                                res.push_back(analyze(cgd(o->d, o->m, 1.0, o->alphas[k], o->f.rng(1 + k)), {}, false));
                            }
                            names.emplace_back("UGD");
                            res.push_back(analyze(ugd(o->d, o->m, o->f.rng(100)), {}, false));

                            std::vector<const SpectrumD*> spectra;
                            for (const auto& a : res) {
                                spectra.push_back(&a.spectrum);
                            }
                            add_scree(run.outputs, o->f.path("scree"), names, spectra, "bulk power laws");

                            std::vector<std::string> header{"x_over_max"};
                            std::vector<std::vector<double>> cols;
                            svg::Plot dens{"max-scaled bulk densities", "lambda / lambda_max", "density", false, true};
                            json fits = json::array();
                            for (std::size_t k = 0; k < res.size(); ++k) {
                                const auto h = histogram(res[k].spectrum, o->bins);
                                if (cols.empty()) {
                                    cols.push_back(bars_x(h));
                                }
                                header.push_back(names[k]);
                                cols.push_back(bars_y(h));
                                dens.add({names[k], cols.front(), cols.back(), svg::Style::Line});
                                fits.push_back({{"name", names[k]},
                                                {"alpha_true", k < o->alphas.size() ? json(o->alphas[k]) : json(-1)},
                                                {"fit", report::to_json(res[k].fit)}});
                            }
                            run.outputs.add(o->f.path("density.csv"), report::csv_text(header, cols));
                            run.outputs.add(o->f.path("density.svg"), dens.render());

                            // UGD against the Marchenko-Pastur law on raw eigenvalues.
                            const double gamma = static_cast<double>(o->d) / static_cast<double>(o->m);
                            const auto& ev = res.back().spectrum.eigenvalues();
                            std::vector<double> vals(ev.data(), ev.data() + ev.size());
                            const double ks = ks_distance(vals, [&](double l) { return mp_cdf(l, 1.0, gamma); });
                            const auto edges = mp_edges(1.0, gamma);
                            const auto raw = histogram_on_edges(vals, linear_edges(vals.back(), vals.front(), 40));
                            std::vector<double> mx, my;
                            for (int k = 0; k <= 400; ++k) {
                                mx.push_back(edges.lo + (edges.hi - edges.lo) * k / 400.0);
                                my.push_back(mp_density(mx.back(), 1.0, gamma));
                            }
                            svg::Plot mp{"UGD against Marchenko-Pastur", "lambda", "density"};
                            mp.add({"UGD", bars_x(raw), bars_y(raw), svg::Style::Bars}).add({"MP", mx, my});
                            run.outputs.add(o->f.path("mp.svg"), mp.render());

                            json doc = run.report();
                            doc["fits"] = fits;
                            doc["mp"] = {{"gamma", gamma},
                                         {"ks", ks},
                                         {"edges_theory", json::array({edges.lo, edges.hi})},
                                         {"edges_empirical", json::array({vals.back(), vals.front()})}};
                            finish(run, o->f, doc);
                            std::cout << "fig2-density:";
                            for (std::size_t k = 0; k < res.size(); ++k) {
                                std::cout << " " << names[k] << " -> " << res[k].fit.alpha << ";";
                            }
                            std::cout << " KS(UGD, MP)=" << ks << "\n";
                        }});
}

void fig3_goe(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 1000;
        Eigen::Index m = 50000;
        double alpha = 0.25;
        int members = 40;
        std::string taus = "log:0.05:3:120";
        double smooth = 0.05;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("fig3-goe", "r-statistics, level spacing and spectral form factor");
    o->f.bind(sub, true);
    sub->add_option("--d", o->d)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{60000}));
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--members", o->members, "SFF ensemble size (disjoint column blocks)")
        ->check(CLI::Range(2, 1000));
    sub->add_option("--taus", o->taus);
    sub->add_option("--sff-smooth", o->smooth)->check(CLI::NonNegativeNumber);
    commands.push_back({sub, [o](Run& run) {
                            const auto taus = parse_grid(o->taus);
                            const double d = o->f.has_data() ? 784.0 : static_cast<double>(o->d);
                            const double m = o->f.has_data() ? 60000.0 : static_cast<double>(o->m);
                            print_budget("fig3-goe", 2 * gram_flops(d, m) + o->members * 4.0 * d * d * d);
                            const DataMatrixD x =
                                o->f.has_data() ? o->f.load() : cgd(o->d, o->m, 1.0, o->alpha, o->f.rng(1));
                            const std::string label = o->f.has_data() ? "data" : "CGD";
                            const Analysis a = analyze(x, {}, true);

                            // Poisson control: iid exponential spacings.
                            std::vector<double> levels{0.0};
                            Philox prng(o->f.rng(2), 0);
                            for (Eigen::Index k = 1; k < x.d(); ++k) {
                                levels.push_back(levels.back() - std::log(prng.uniform()));
                            }
                            const auto poisson = r_statistics_of_levels(levels);

                            // SFF over disjoint column blocks.
                            const Eigen::Index block = x.M() / o->members;
                            if (block < 2) {
                                throw InvalidArgument("too many SFF members for the number of samples");
                            }
                            std::vector<std::vector<double>> members(static_cast<std::size_t>(o->members));
                            parallel_for(members.size(), [&](std::size_t k) {
                                const auto b = static_cast<Eigen::Index>(k);
                                const auto s = detect_bulk(
                                    eigenvalues(gram(x.values().middleCols(b * block, block)), block));
                                members[k] = unfold(s).levels;
                            });
                            auto sff = spectral_form_factor(std::span<const std::vector<double>>(members), taus);
                            if (o->smooth > 0) {
                                sff = smooth_sff(sff, o->smooth);
                            }
                            std::vector<double> goe;
                            double max_dev = 0.0;
                            for (std::size_t k = 0; k < sff.taus.size(); ++k) {
                                goe.push_back(goe_sff(sff.taus[k]));
                                if (sff.taus[k] >= 0.2) {
                                    max_dev = std::max(max_dev, std::abs(sff.values[k] - goe.back()));
                                }
                            }

                            svg::Plot rp{"r statistics", "r", "density"};
                            std::vector<double> rx, ry;
                            for (int k = 0; k <= 200; ++k) {
                                rx.push_back(k / 200.0);
                                ry.push_back(goe_r_density(rx.back()));
                            }
                            rp.add({label, bars_x(a.r.histogram), bars_y(a.r.histogram), svg::Style::Bars})
                                .add({"GOE", rx, ry});
                            run.outputs.add(o->f.path("r_statistics.svg"), rp.render());
                            svg::Plot sp{"level spacing", "s", "p(s)"};
                            std::vector<double> sx, sy;
                            for (int k = 0; k <= 200; ++k) {
                                sx.push_back(4.0 * k / 200);
                                sy.push_back(wigner_surmise(sx.back()));
                            }
                            sp.add({label, bars_x(a.spacing.histogram), bars_y(a.spacing.histogram),
                                    svg::Style::Bars})
                                .add({"Wigner surmise", sx, sy});
                            run.outputs.add(o->f.path("spacing.svg"), sp.render());
                            svg::Plot fp{"spectral form factor", "tau", "K(tau)", true, true};
                            fp.add({label, sff.taus, sff.values}).add({"GOE", sff.taus, goe});
                            run.outputs.add(o->f.path("sff.svg"), fp.render());
                            run.outputs.add(o->f.path("sff.csv"),
                                            report::csv_text({"tau", "K", "K_goe"}, {sff.taus, sff.values, goe}));
                            run.outputs.add(o->f.path("spacing.csv"),
                                            report::csv_text({"s", "density"}, {bars_x(a.spacing.histogram),
                                                                                bars_y(a.spacing.histogram)}));

                            json doc = run.report();
                            doc["dataset"] = {{"label", label}, {"source", x.source()}, {"d", x.d()}, {"M", x.M()}};
                            doc["spectrum"] = to_json(a);
                            doc["r_mean"] = a.r.mean;
                            doc["r_goe"] = kGoeMeanR;
                            doc["poisson_control"] = {{"r_mean", poisson.mean}, {"r_poisson", kPoissonMeanR}};
                            doc["sff"] = report::to_json(sff);
                            doc["sff"]["max_deviation_from_goe_tau_ge_0.2"] = max_dev;
                            finish(run, o->f, doc);
                            std::cout << "fig3-goe: <r>(" << label << ")=" << a.r.mean << " (GOE " << kGoeMeanR
                                      << "), Poisson control " << poisson.mean << ", KS(spacing)=" << a.ks_wigner
                                      << ", SFF max deviation " << max_dev << "\n";
                        }});
}

void fig4_convergence(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 784;
        Eigen::Index m = 60000;
        double alpha = 0.25;
        int points = 20;
        int seeds = 3;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("fig4-convergence", "delta, Delta and epsilon against dataset size M");
    o->f.bind(sub, true);
    sub->add_option("--d", o->d)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m, "largest M")->check(CLI::Range(Eigen::Index{200}, Eigen::Index{60000}));
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--points", o->points, "M grid points")->check(CLI::Range(5, 200));
    sub->add_option("--seeds", o->seeds, "subsets per M")->check(CLI::Range(1, 100));
    commands.push_back({sub, [o](Run& run) {
                            const double d = o->f.has_data() ? 784.0 : static_cast<double>(o->d);
                            const double m = o->f.has_data() ? 60000.0 : static_cast<double>(o->m);
                            print_budget("fig4-convergence",
                                         gram_flops(d, m) * (1.0 + o->seeds * 3.0 / o->points * o->points / 4.0) +
                                             o->points * o->seeds * 8.0 * d * d * d);
                            const DataMatrixD x =
                                o->f.has_data() ? o->f.load() : cgd(o->d, o->m, 1.0, o->alpha, o->f.rng(1));
                            const auto ms = log_grid(100, x.M(), o->points);
                            const auto s = sweep(x, ms, o->seeds, o->f.rng(2));
                            std::vector<double> mcol(ms.begin(), ms.end());
                            run.outputs.add(o->f.path("convergence.csv"),
                                            report::csv_text({"M", "delta", "delta_se", "Delta", "Delta_se", "epsilon",
                                                              "epsilon_se"},
                                                             {mcol, s.delta, s.delta_se, s.Delta, s.Delta_se,
                                                              s.epsilon, s.epsilon_se}));
                            svg::Plot p{"convergence with dataset size", "M", "metric", true, true};
                            p.add({"delta", mcol, s.delta}).add({"Delta", mcol, s.Delta}).add({"epsilon", mcol,
                                                                                               s.epsilon});
                            run.outputs.add(o->f.path("convergence.svg"), p.render());

                            const auto md = locate_mcrit(s, SweepMetric::delta);
                            const auto mD = locate_mcrit(s, SweepMetric::Delta);
                            // Pre-plateau slope of epsilon: points below the earlier M_crit.
                            const Eigen::Index cut = std::max(md.converged ? md.m_crit : x.M(),
                                                              mD.converged ? mD.m_crit : x.M());
                            std::vector<double> lx, ly;
                            for (std::size_t k = 0; k < ms.size(); ++k) {
                                if (ms[k] <= cut && s.epsilon[k] > 0) {
                                    lx.push_back(std::log(static_cast<double>(ms[k])));
                                    ly.push_back(std::log(s.epsilon[k]));
                                }
                            }
                            const double slope = lx.size() >= 2 ? linear_fit(lx, ly).slope : NAN;
                            auto mjson = [](const McritResult& r) {
                                return json{{"converged", r.converged},
                                            {"m_crit", r.converged ? json(r.m_crit) : json(nullptr)},
                                            {"plateau", report::number(r.plateau)},
                                            {"reason", r.reason}};
                            };
                            json doc = run.report();
                            doc["dataset"] = {{"source", x.source()}, {"d", x.d()}, {"M", x.M()}};
                            doc["m_crit"] = {{"delta", mjson(md)}, {"Delta", mjson(mD)}};
                            doc["epsilon_slope"] = report::number(slope);
                            doc["reference"] = {{"alpha_full", s.reference.alpha_full},
                                                {"bulk_full", report::to_json(s.reference.bulk_full)}};
                            finish(run, o->f, doc);
                            std::cout << "fig4-convergence: M_crit(delta)="
                                      << (md.converged ? std::to_string(md.m_crit) : "none")
                                      << " M_crit(Delta)=" << (mD.converged ? std::to_string(mD.m_crit) : "none")
                                      << " epsilon slope " << slope << " (d=" << x.d() << ")\n";
                        }});
}

void fig5_entropy(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 784;
        Eigen::Index m = 50000;
        std::vector<double> alphas{0.25, 0.5};
        int points = 14;
        int seeds = 2;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("fig5-entropy", "spectral entropy of UGD and CGD and its convergence in M");
    o->f.bind(sub, false);
    sub->add_option("--d", o->d)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m)->check(CLI::Range(Eigen::Index{200}, Eigen::Index{60000}));
    sub->add_option("--alphas", o->alphas)->delimiter(',');
    sub->add_option("--points", o->points)->check(CLI::Range(5, 200));
    sub->add_option("--seeds", o->seeds)->check(CLI::Range(1, 100));
    commands.push_back({sub, [o](Run& run) {
                            const double d = static_cast<double>(o->d), m = static_cast<double>(o->m);
                            print_budget("fig5-entropy", (o->alphas.size() + 1) * gram_flops(d, m) +
                                                             o->alphas.size() * o->points * o->seeds *
                                                                 (gram_flops(d, m / 4) + 4 * d * d * d));
                            std::vector<std::string> names{"UGD"};
                            std::vector<DataMatrixD> data{ugd(o->d, o->m, o->f.rng(1))};
                            for (std::size_t k = 0; k < o->alphas.size(); ++k) {
                                names.push_back("CGD alpha=" + report::number(o->alphas[k]).dump());
                                data.push_back(cgd(o->d, o->m, 1.0, o->alphas[k], o->f.rng(2 + k)));
                            }
                            std::vector<SpectrumD> spectra;
                            IndexRange common{1, o->d};
                            for (const auto& x : data) {
                                spectra.push_back(detect_bulk(eigenvalues(gram(x), x.M())));
                                common.start = std::max(common.start, spectra.back().bulk_range()->start);
                                common.end = std::min(common.end, spectra.back().bulk_range()->end);
                            }
                            if (common.end < common.start + kMinBulkSpan) {
                                throw InsufficientSpectrum("the detected bulks do not share enough indices");
                            }
                            std::vector<double> h;
                            for (const auto& s : spectra) {
                                h.push_back(spectral_entropy(s.with_bulk(common)));
                            }
                            bool ordered = true;
                            for (std::size_t k = 1; k < h.size(); ++k) {
                                ordered = ordered && h[k] < h[k - 1];
                            }

                            const auto ms = log_grid(100, o->m, o->points);
                            std::vector<double> mcol(ms.begin(), ms.end());
                            std::vector<std::string> header{"M"};
                            std::vector<std::vector<double>> cols{mcol};
                            svg::Plot p{"entropy convergence", "M", "H_M / H_full", true, false};
                            json traj = json::array();
                            for (std::size_t k = 1; k < data.size(); ++k) {
                                const auto s = sweep(data[k], ms, o->seeds, o->f.rng(50 + k));
                                const auto t = entropy_trajectory(s);
                                Eigen::Index reach = 0;
                                for (std::size_t j = 0; j < ms.size(); ++j) {
                                    if (!is_skipped(t.normalized_entropy[j]) &&
                                        std::abs(t.normalized_entropy[j] - 1.0) <= 0.01) {
                                        reach = ms[j];
                                        break;
                                    }
                                }
                                header.push_back(names[k]);
                                cols.push_back(t.normalized_entropy);
                                p.add({names[k], mcol, t.normalized_entropy, svg::Style::Line});
                                traj.push_back({{"name", names[k]},
                                                {"normalized_entropy", report::numbers(t.normalized_entropy)},
                                                {"m_reach_0.99", reach > 0 ? json(reach) : json(nullptr)}});
                            }
                            run.outputs.add(o->f.path("entropy_trajectory.csv"), report::csv_text(header, cols));
                            run.outputs.add(o->f.path("entropy_trajectory.svg"), p.render());

                            json doc = run.report();
                            doc["common_bulk"] = report::to_json(common);
                            doc["entropy"] = json::array();
                            for (std::size_t k = 0; k < h.size(); ++k) {
                                doc["entropy"].push_back({{"name", names[k]}, {"H", h[k]}});
                            }
                            doc["ordered"] = ordered;
                            doc["m_grid"] = mcol;
                            doc["trajectories"] = traj;
                            finish(run, o->f, doc);
                            std::cout << "fig5-entropy: bulk [" << common.start << ", " << common.end << "]";
                            for (std::size_t k = 0; k < h.size(); ++k) {
                                std::cout << " H(" << names[k] << ")=" << h[k];
                            }
                            std::cout << (ordered ? " (ordered)\n" : " (not ordered)\n");
                        }});
}

void appb_genmp(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d = 380;
        Eigen::Index m = 1000;
        double c = 1.14;
        double alpha = 0.25;
        double eps = 1e-2;
        std::size_t bins = 64;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("appB-genmp", "generalized MP density against a matched CGD histogram");
    o->f.bind(sub, false);
    sub->add_option("--d", o->d)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{1024}));
    sub->add_option("--m", o->m)->check(CLI::Range(Eigen::Index{64}, Eigen::Index{60000}));
    sub->add_option("--c", o->c)->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--eps", o->eps);
    sub->add_option("--bins", o->bins)->check(CLI::Range(2, 10000));
    commands.push_back({sub, [o](Run& run) {
                            if (o->d > o->m) {
                                throw InvalidArgument("--d must not exceed --m");
                            }
                            const double gamma = static_cast<double>(o->d) / static_cast<double>(o->m);
                            print_budget("appB-genmp", gram_flops(static_cast<double>(o->d),
                                                                  static_cast<double>(o->m)) + 2e9);
                            const auto cov = PopulationCovariance<double>::toeplitz(o->d, o->c, o->alpha);
                            const auto x = preprocess(sample_gaussian(cov, o->m, o->f.rng(1)), false);
                            const auto s = detect_bulk(eigenvalues(gram(x), x.M()));
                            const double top = s[s.bulk_range()->start];
                            const auto grid = composite_grid(0.0, 1.1 * top, 4.0 * s.max(),
                                                             static_cast<std::size_t>(2.2 * top / o->eps) + 1, 400);
                            const auto sol = solve_stieltjes(gamma, cov, grid, o->eps);
                            const auto cmp = compare_on_bulk_window(s, sol.lambda, sol.density, o->bins);

                            // Identity population against the closed form.
                            const auto mpe = mp_edges(1.0, gamma);
                            // spacing eps / 2
                            std::vector<double> ig = linear_edges(
                                0.0, mpe.hi * 1.2, static_cast<std::size_t>(std::ceil(2.4 * mpe.hi / o->eps)));
                            const auto id = solve_stieltjes(gamma, PopulationCovariance<double>::identity(2, 1.0),
                                                            ig, o->eps);
                            std::vector<double> closed;
                            double id_dev = 0.0;
                            for (std::size_t k = 0; k < ig.size(); ++k) {
                                closed.push_back(mp_density(ig[k], 1.0, gamma));
                                if (ig[k] >= mpe.lo + 0.05 && ig[k] <= mpe.hi - 0.05) {
                                    id_dev = std::max(id_dev, std::abs(id.density[k] - closed.back()));
                                }
                            }

                            run.outputs.add(o->f.path("genmp.csv"),
                                            report::csv_text({"lambda", "density"}, {sol.lambda, sol.density}));
                            run.outputs.add(o->f.path("comparison.csv"),
                                            report::csv_text({"center", "empirical", "theory"},
                                                             {bars_x(cmp.empirical), bars_y(cmp.empirical),
                                                              bars_y(cmp.theory)}));
                            svg::Plot p{"generalized MP on the bulk window", "lambda", "density"};
                            p.add({"CGD", bars_x(cmp.empirical), bars_y(cmp.empirical), svg::Style::Bars})
                                .add({"theory", bars_x(cmp.theory), bars_y(cmp.theory)});
                            run.outputs.add(o->f.path("genmp.svg"), p.render());
                            svg::Plot q{"identity population", "lambda", "density"};
                            q.add({"solver", ig, id.density}).add({"closed form", ig, closed, svg::Style::Points});
                            run.outputs.add(o->f.path("mp_identity.svg"), q.render());

                            json doc = run.report();
                            doc["gamma"] = gamma;
                            doc["population"] = cov.describe();
                            doc["bulk_range"] = report::to_json(*s.bulk_range());
                            doc["density_mass"] = sol.mass();
                            doc["max_residual"] = sol.max_residual;
                            doc["kl_bulk_window"] = cmp.kl;
                            doc["identity_max_deviation"] = id_dev;
                            finish(run, o->f, doc);
                            std::cout << "appB-genmp: gamma=" << gamma << " mass=" << sol.mass()
                                      << " KL(bulk window)=" << cmp.kl << " identity max deviation " << id_dev
                                      << "\n";
                        }});
}

void appd_teacher(CLI::App& fig, std::vector<Command>& commands) {
    struct Opts {
        FigureOpts f;
        Eigen::Index d_in = 500;
        Eigen::Index n_train = 2000;
        double alpha = 0.25;
        double eta = 1e-3;
        int steps = 20000;
        int seeds = 20;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = fig.add_subcommand("appD-teacher", "teacher-student losses: gradient descent against theory");
    o->f.bind(sub, false);
    sub->add_option("--d-in", o->d_in)->check(CLI::Range(Eigen::Index{2}, Eigen::Index{1024}));
    sub->add_option("--n-train", o->n_train)->check(CLI::Range(Eigen::Index{2}, Eigen::Index{60000}));
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--eta", o->eta)->check(CLI::PositiveNumber);
    sub->add_option("--steps", o->steps)->check(CLI::Range(1, 10000000));
    sub->add_option("--seeds", o->seeds)->check(CLI::Range(1, 1000));
    commands.push_back({sub, [o](Run& run) {
                            const double d = static_cast<double>(o->d_in);
                            print_budget("appD-teacher",
                                         o->seeds * (gram_flops(d, static_cast<double>(o->n_train)) +
                                                     8.0 * d * d * d + 2.0 * d * d * o->steps));
                            TSConfig cfg;
                            cfg.d_in = o->d_in;
                            cfg.n_train = o->n_train;
                            cfg.eta0 = o->eta;
                            cfg.steps = o->steps;
                            cfg.cov = PopulationCovariance<double>::toeplitz(o->d_in, 1.0, o->alpha);
                            const auto rec = record_steps(o->steps);
                            const std::size_t n = rec.size();
                            std::vector<double> tr(n), gen(n), tra(n), gena(n), haar(n), times;
                            double flow_dev = 0.0;
                            for (int s = 0; s < o->seeds; ++s) {
                                cfg.seed = o->f.rng(static_cast<std::uint64_t>(s));
                                const auto p = make_problem(cfg);
                                auto traj = simulate_gd(p, rec);
                                analytic_flow(p, traj, ProjectionMode::Exact);
                                const auto h = analytic_gen_haar(p, traj.times);
                                times = traj.times;
                                for (std::size_t k = 0; k < n; ++k) {
                                    tr[k] += traj.loss_train_sim[k] / o->seeds;
                                    gen[k] += traj.loss_gen_sim[k] / o->seeds;
                                    tra[k] += traj.loss_train_analytic[k] / o->seeds;
                                    gena[k] += traj.loss_gen_analytic[k] / o->seeds;
                                    haar[k] += h[k] / o->seeds;
                                    if (traj.loss_train_analytic[k] > 0) {
                                        flow_dev = std::max(flow_dev, std::abs(traj.loss_train_sim[k] /
                                                                                   traj.loss_train_analytic[k] -
                                                                               1.0));
                                    }
                                }
                            }
                            const std::size_t mid = n / 2;
                            const double haar_dev = std::abs(gen[mid] / haar[mid] - 1.0);
                            run.outputs.add(o->f.path("losses.csv"),
                                            report::csv_text({"time", "train_sim", "gen_sim", "train_flow",
                                                              "gen_flow", "gen_haar"},
                                                             {times, tr, gen, tra, gena, haar}));
                            std::vector<double> t1(times.begin() + 1, times.end());
                            auto tail = [](const std::vector<double>& v) {
                                return std::vector<double>(v.begin() + 1, v.end());
                            };
                            svg::Plot p{"teacher-student losses", "t", "loss", true, true};
                            p.add({"train (GD)", t1, tail(tr), svg::Style::Points})
                                .add({"train (flow)", t1, tail(tra)})
                                .add({"gen (GD)", t1, tail(gen), svg::Style::Points})
                                .add({"gen (Haar)", t1, tail(haar)});
                            run.outputs.add(o->f.path("losses.svg"), p.render());
                            json doc = run.report();
                            doc["convention"] = "Delta_0 components N(0, 1/d_in), E|Delta_0|^2 = 1; exact mode uses "
                                                "the realized Delta_0, the Haar curve uses the expectation";
                            doc["max_relative_gd_vs_flow_train"] = flow_dev;
                            doc["haar_relative_deviation_mid"] = haar_dev;
                            doc["mid_time"] = times[mid];
                            finish(run, o->f, doc);
                            std::cout << "appD-teacher: max |GD/flow - 1| (train) " << flow_dev
                                      << ", Haar deviation at t=" << times[mid] << ": " << haar_dev << "\n";
                        }});
}

}  // namespace

void register_figures(CLI::App& app, std::vector<Command>& commands) {
    auto* fig = app.add_subcommand("figure", "end-to-end figure reproductions at desk scale");
    fig->require_subcommand(1);
    fig1_scree(*fig, commands);
    fig2_density(*fig, commands);
    fig3_goe(*fig, commands);
    fig4_convergence(*fig, commands);
    fig5_entropy(*fig, commands);
    appb_genmp(*fig, commands);
    appd_teacher(*fig, commands);
}

}  // namespace cli
