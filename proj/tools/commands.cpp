#include <cmath>
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

struct SeedOpts {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    void bind(CLI::App* sub) {
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--stream", stream, "random stream");
    }
    [[nodiscard]] RngSeed rng() const { return {seed, stream}; }
};

struct InputOpts {
    std::string path;
    bool standardize = false;
    std::string layout = "rows";
    bool header = false;

    void bind(CLI::App* sub) {
        sub->add_option("--in", path, "input file (IDX, GRM1 or CSV)")->required()->check(CLI::ExistingFile);
        sub->add_flag("--standardize", standardize, "divide features by their standard deviation after centering");
        sub->add_option("--csv-layout", layout, "CSV orientation")->check(CLI::IsMember({"rows", "columns"}));
        sub->add_flag("--header", header, "CSV has a header row");
    }
    [[nodiscard]] DataMatrixD load() const {
        return preprocess(io::load_any(path, parse_layout(layout), header), standardize);
    }
};

ToeplitzSpectrum parse_spectrum(const std::string& s) {
    if (s == "power-law") {
        return ToeplitzSpectrum::PowerLaw;
    }
    if (s == "laplace-series") {
        return ToeplitzSpectrum::LaplaceSeries;
    }
    return ToeplitzSpectrum::DenseSvd;
}

void synth_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        std::string kind = "cgd";
        Eigen::Index d = 1000;
        Eigen::Index m = 50000;
        double alpha = 0.25;
        double c = 1.0;
        double sigma2 = 1.0;
        std::string spectrum = "power-law";
        SeedOpts seed;
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("synth", "generate uncorrelated (ugd) or correlated (cgd) Gaussian data");
    sub->add_option("--kind", o->kind)->check(CLI::IsMember({"ugd", "cgd"}));
    sub->add_option("--d", o->d, "features")->check(CLI::Range(Eigen::Index{2}, Eigen::Index{1} << 20));
    sub->add_option("--m", o->m, "samples")->check(CLI::Range(Eigen::Index{2}, Eigen::Index{1} << 32));
    auto* alpha = sub->add_option("--alpha", o->alpha, "cgd exponent");
    auto* c = sub->add_option("--c", o->c, "cgd amplitude")->check(CLI::PositiveNumber);
    auto* sigma2 = sub->add_option("--sigma2", o->sigma2, "ugd variance")->check(CLI::PositiveNumber);
    auto* spectrum = sub->add_option("--spectrum", o->spectrum, "cgd population spectrum")
                         ->check(CLI::IsMember({"power-law", "laplace-series", "dense-svd"}));
    o->seed.bind(sub);
    sub->add_option("--out", o->out, "output .grm1 file")->required();
    commands.push_back({sub, [o, alpha, c, sigma2, spectrum](Run& run) {
                            if (o->kind == "ugd" && (alpha->count() || c->count() || spectrum->count())) {
                                throw InvalidArgument("--alpha, --c and --spectrum only apply to --kind cgd");
                            }
                            if (o->kind == "cgd" && sigma2->count()) {
                                throw InvalidArgument("--sigma2 only applies to --kind ugd");
                            }
                            const auto cov =
                                o->kind == "ugd"
                                    ? PopulationCovariance<double>::identity(o->d, o->sigma2)
                                    : PopulationCovariance<double>::toeplitz(o->d, o->c, o->alpha,
                                                                             parse_spectrum(o->spectrum));
                            const auto x = sample_gaussian(cov, o->m, o->seed.rng());
                            run.outputs.add(o->out, io::encode_raw(x));
                            std::cout << "synth: " << cov.describe() << ", d=" << x.d() << ", M=" << x.M() << " -> "
                                      << o->out << "\n";
                        }});
}

void corrupt_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        std::string in;
        double fraction = 0.5;
        SeedOpts seed;
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("corrupt", "mix a dataset with variance-matched Gaussian noise");
    sub->add_option("--in", o->in)->required()->check(CLI::ExistingFile);
    sub->add_option("--fraction", o->fraction, "noise fraction in [0, 1]")->required();
    o->seed.bind(sub);
    sub->add_option("--out", o->out, "output .grm1 file")->required();
    commands.push_back({sub, [o](Run& run) {
                            const auto x = io::load_any(o->in);
                            const auto y = corrupt_with_noise(x, o->fraction, o->seed.rng());
                            run.outputs.add(o->out, io::encode_raw(y));
                            std::cout << "corrupt: fraction " << o->fraction << ", d=" << y.d() << ", M=" << y.M()
                                      << " -> " << o->out << "\n";
                        }});
}

void spectrum_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        InputOpts input;
        Eigen::Index bulk_start = 10;
        std::size_t bins = 64;
        std::string out;
        std::string csv;
        std::string svg;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("spectrum", "Gram spectrum, bulk power-law fit, entropy and histogram");
    o->input.bind(sub);
    sub->add_option("--bulk-start", o->bulk_start, "first bulk index")->check(CLI::PositiveNumber);
    sub->add_option("--bins", o->bins, "histogram bins")->check(CLI::Range(2, 100000));
    sub->add_option("--out", o->out, "JSON report")->required();
    sub->add_option("--csv", o->csv, "scree CSV (index, eigenvalue)");
    sub->add_option("--svg", o->svg, "log-log scree plot");
    commands.push_back({sub, [o](Run& run) {
                            const auto x = o->input.load();
                            BulkOptions bulk;
                            bulk.i_start = o->bulk_start;
                            const Analysis a = analyze(x, bulk);
                            json doc = run.report();
                            doc["input"] = {{"path", o->input.path}, {"source", x.source()}};
                            doc["preprocessing"] = {{"centered", x.preprocessing().centered},
                                                    {"standardized", x.preprocessing().standardized}};
                            doc["spectrum"] = to_json(a);
                            doc["spectrum"]["histogram"] = report::to_json(histogram(a.spectrum, o->bins));
                            doc["spectrum"]["eigenvalues"] = to_std(a.spectrum.eigenvalues());
                            doc["wall_time_s"] = run.elapsed();
                            run.outputs.add(o->out, doc.dump(2) + "\n");
                            if (!o->csv.empty() || !o->svg.empty()) {
                                Outputs scree;
                                add_scree(scree, "scree", {"eigenvalue"}, {&a.spectrum}, "scree");
                                if (!o->csv.empty()) {
                                    run.outputs.add(o->csv, scree.files()[0].second);
                                }
                                if (!o->svg.empty()) {
                                    run.outputs.add(o->svg, scree.files()[1].second);
                                }
                            }
                            const auto& r = *a.spectrum.bulk_range();
                            std::cout << "spectrum: d=" << x.d() << " M=" << x.M() << " bulk=[" << r.start << ", "
                                      << r.end << "] alpha=" << a.fit.alpha << " r2=" << a.fit.r_squared
                                      << " H=" << a.entropy << " <r>=" << a.r.mean << "\n";
                        }});
}

void rmt_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        InputOpts input;
        std::vector<std::string> diagnostics{"r", "spacing", "sff"};
        int subsets = 40;
        Eigen::Index subset_size = 1000;
        std::string taus = "lin:0.05:3:600";
        double smooth = 0.05;
        Eigen::Index bulk_start = 10;
        SeedOpts seed;
        std::string out;
        std::string plots;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("rmt", "r-statistics, level spacing and spectral form factor");
    o->input.bind(sub);
    sub->add_option("--diagnostics", o->diagnostics, "comma list of r, spacing, sff")
        ->delimiter(',')
        ->check(CLI::IsMember({"r", "spacing", "sff"}));
    sub->add_option("--subsets", o->subsets, "SFF ensemble size")->check(CLI::PositiveNumber);
    sub->add_option("--subset-size", o->subset_size, "columns per SFF subset")->check(CLI::PositiveNumber);
    sub->add_option("--taus", o->taus, "tau grid: lin:LO:HI:N, log:LO:HI:N or a list");
    sub->add_option("--sff-smooth", o->smooth, "running-mean half width in tau (0 disables)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--bulk-start", o->bulk_start)->check(CLI::PositiveNumber);
    o->seed.bind(sub);
    sub->add_option("--out", o->out, "JSON report")->required();
    sub->add_option("--plots", o->plots, "directory for SVG overlays");
    commands.push_back({sub, [o](Run& run) {
                            auto has = [&](const char* d) {
                                return std::find(o->diagnostics.begin(), o->diagnostics.end(), d) !=
                                       o->diagnostics.end();
                            };
                            const auto taus = parse_grid(o->taus);
                            const auto x = o->input.load();
                            if (has("sff") && o->subset_size > x.M()) {
                                throw InvalidArgument("--subset-size exceeds the number of samples");
                            }
                            BulkOptions bulk;
                            bulk.i_start = o->bulk_start;
                            const Analysis a = analyze(x, bulk, has("spacing"));
                            json doc = run.report();
                            doc["input"] = {{"path", o->input.path}, {"d", x.d()}, {"M", x.M()}};
                            doc["bulk_range"] = report::to_json(*a.spectrum.bulk_range());
                            std::cout << "rmt:";
                            if (has("r")) {
                                doc["r_statistics"] = report::to_json(a.r);
                                doc["r_statistics"]["goe_mean"] = kGoeMeanR;
                                doc["r_statistics"]["poisson_mean"] = kPoissonMeanR;
                                std::cout << " <r>=" << a.r.mean;
                                if (!o->plots.empty()) {
                                    svg::Plot p{"r statistics", "r", "density"};
                                    std::vector<double> xs, ys, rx, ry;
                                    for (std::size_t k = 0; k < a.r.histogram.bins(); ++k) {
                                        xs.push_back(a.r.histogram.center(k));
                                        ys.push_back(a.r.histogram.density(k));
                                    }
                                    for (int k = 0; k <= 200; ++k) {
                                        rx.push_back(k / 200.0);
                                        ry.push_back(goe_r_density(k / 200.0));
                                    }
                                    p.add({"empirical", xs, ys, svg::Style::Bars}).add({"GOE", rx, ry});
                                    run.outputs.add(fs::path(o->plots) / "r_statistics.svg", p.render());
                                }
                            }
                            if (has("spacing")) {
                                if (!a.unfolded) {
                                    throw InsufficientSpectrum("bulk too small to unfold");
                                }
                                doc["spacing"] = {{"mean_spacing", a.unfolding.mean_spacing},
                                                  {"quality_ok", a.unfolding.quality_ok},
                                                  {"ks_to_wigner_surmise", a.ks_wigner},
                                                  {"histogram", report::to_json(a.spacing.histogram)}};
                                std::cout << " KS(spacing, surmise)=" << a.ks_wigner;
                                if (!o->plots.empty()) {
                                    svg::Plot p{"level spacing", "s", "p(s)"};
                                    std::vector<double> xs, ys, rx, ry;
                                    for (std::size_t k = 0; k < a.spacing.histogram.bins(); ++k) {
                                        xs.push_back(a.spacing.histogram.center(k));
                                        ys.push_back(a.spacing.histogram.density(k));
                                    }
                                    for (int k = 0; k <= 200; ++k) {
                                        rx.push_back(4.0 * k / 200);
                                        ry.push_back(wigner_surmise(rx.back()));
                                    }
                                    p.add({"empirical", xs, ys, svg::Style::Bars}).add({"Wigner surmise", rx, ry});
                                    run.outputs.add(fs::path(o->plots) / "spacing.svg", p.render());
                                }
                            }
                            if (has("sff")) {
                                std::vector<std::vector<double>> members(static_cast<std::size_t>(o->subsets));
                                parallel_for(members.size(), [&](std::size_t k) {
                                    Philox rng(o->seed.rng().derive(0x5ff), k);
                                    const auto cols = sample_columns(x.M(), o->subset_size, rng);
                                    const auto s = detect_bulk(
                                        eigenvalues(gram_columns(x.values(), cols), o->subset_size), bulk);
                                    members[k] = unfold(s).levels;
                                });
                                auto curve = spectral_form_factor(std::span<const std::vector<double>>(members), taus);
                                if (o->smooth > 0) {
                                    curve = smooth_sff(curve, o->smooth);
                                }
                                std::vector<double> plateau;
                                for (std::size_t k = 0; k < curve.taus.size(); ++k) {
                                    if (curve.taus[k] >= 1.0) {
                                        plateau.push_back(curve.values[k]);
                                    }
                                }
                                doc["sff"] = report::to_json(curve);
                                doc["sff"]["smoothing_half_width"] = o->smooth;
                                doc["sff"]["plateau_mean"] = report::number(plateau.empty() ? NAN : mean_of(plateau));
                                std::cout << " SFF plateau=" << (plateau.empty() ? NAN : mean_of(plateau));
                                if (!o->plots.empty()) {
                                    svg::Plot p{"spectral form factor", "tau", "K(tau)", true, true};
                                    std::vector<double> ref;
                                    for (double t : curve.taus) {
                                        ref.push_back(goe_sff(t));
                                    }
                                    p.add({"empirical", curve.taus, curve.values}).add({"GOE", curve.taus, ref});
                                    run.outputs.add(fs::path(o->plots) / "sff.svg", p.render());
                                }
                            }
                            std::cout << "\n";
                            doc["wall_time_s"] = run.elapsed();
                            run.outputs.add(o->out, doc.dump(2) + "\n");
                        }});
}

void theory_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        std::string law = "mp";
        double gamma = 0.25;
        double c = 1.0;
        double alpha = 0.25;
        double sigma2 = 1.0;
        double lmin = 0.0;
        double lmax = 3.0;
        int points = 6001;
        double eps = 1e-3;
        std::string out;
        std::string svg;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("theory", "Marchenko-Pastur or generalized MP density on a grid");
    sub->add_option("--law", o->law)->check(CLI::IsMember({"mp", "genmp"}));
    sub->add_option("--gamma", o->gamma, "d / M in (0, 1]");
    sub->add_option("--c", o->c)->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--sigma2", o->sigma2)->check(CLI::PositiveNumber);
    sub->add_option("--lmin", o->lmin);
    sub->add_option("--lmax", o->lmax);
    sub->add_option("--points", o->points)->check(CLI::Range(2, 10000000));
    sub->add_option("--eps", o->eps, "imaginary offset for the Stieltjes inversion");
    sub->add_option("--out", o->out, "CSV (lambda, density)")->required();
    sub->add_option("--svg", o->svg);
    commands.push_back({sub, [o](Run& run) {
                            if (!(o->lmax > o->lmin)) {
                                throw InvalidArgument("--lmax must exceed --lmin");
                            }
                            std::vector<double> grid(static_cast<std::size_t>(o->points));
                            for (int k = 0; k < o->points; ++k) {
                                grid[static_cast<std::size_t>(k)] =
                                    o->lmin + (o->lmax - o->lmin) * k / (o->points - 1.0);
                            }
                            std::vector<std::string> header{"lambda", "density"};
                            std::vector<std::vector<double>> cols{grid, {}};
                            if (o->law == "mp") {
                                for (double l : grid) {
                                    cols[1].push_back(mp_density(l, o->sigma2, o->gamma));
                                }
                            } else {
                                const auto sol = solve_stieltjes(
                                    o->gamma, PopulationCovariance<double>::toeplitz(2, o->c, o->alpha), grid, o->eps);
                                cols[1] = sol.density;
                                header.insert(header.end(), {"re_g", "im_g"});
                                cols.emplace_back();
                                cols.emplace_back();
                                for (const auto& g : sol.g) {
                                    cols[2].push_back(g.real());
                                    cols[3].push_back(g.imag());
                                }
                                std::cout << "theory: grid mass " << sol.mass() << ", max residual "
                                          << sol.max_residual << "\n";
                            }
                            run.outputs.add(o->out, report::csv_text(header, cols));
                            if (!o->svg.empty()) {
                                svg::Plot p{o->law == "mp" ? "Marchenko-Pastur" : "generalized MP", "lambda",
                                            "density"};
                                p.add({"density", cols[0], cols[1]});
                                run.outputs.add(o->svg, p.render());
                            }
                        }});
}

void converge_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        InputOpts input;
        std::string grid = "log:100:60000:24";
        int seeds = 5;
        SeedOpts seed;
        Eigen::Index bulk_start = 10;
        std::string out;
        std::string json_out;
        std::string svg;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("converge", "convergence metrics over dataset size M");
    o->input.bind(sub);
    sub->add_option("--m-grid", o->grid, "M grid: log:LO:HI:N or a list");
    sub->add_option("--seeds", o->seeds, "subsets per M")->check(CLI::PositiveNumber);
    sub->add_option("--bulk-start", o->bulk_start)->check(CLI::PositiveNumber);
    o->seed.bind(sub);
    sub->add_option("--out", o->out, "sweep CSV")->required();
    sub->add_option("--json", o->json_out, "JSON report");
    sub->add_option("--svg", o->svg, "log-log metric plot");
    commands.push_back({sub, [o](Run& run) {
                            const auto x = o->input.load();
                            std::vector<Eigen::Index> ms;
                            for (double v : parse_grid(o->grid)) {
                                const auto m = static_cast<Eigen::Index>(std::llround(v));
                                if (ms.empty() || m > ms.back()) {
                                    ms.push_back(std::min(m, x.M()));
                                }
                            }
                            ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
                            SweepOptions so;
                            so.bulk.i_start = o->bulk_start;
                            const auto s = sweep(x, ms, o->seeds, o->seed.rng(), so);
                            std::vector<double> mcol(ms.begin(), ms.end());
                            run.outputs.add(o->out,
                                            report::csv_text({"M", "delta", "delta_se", "Delta", "Delta_se", "epsilon",
                                                              "epsilon_se", "entropy", "entropy_se"},
                                                             {mcol, s.delta, s.delta_se, s.Delta, s.Delta_se,
                                                              s.epsilon, s.epsilon_se, s.entropy, s.entropy_se}));
                            const auto md = locate_mcrit(s, SweepMetric::delta);
                            const auto mD = locate_mcrit(s, SweepMetric::Delta);
                            auto mjson = [](const McritResult& r) {
                                return json{{"converged", r.converged},
                                            {"m_crit", r.converged ? json(r.m_crit) : json(nullptr)},
                                            {"plateau", report::number(r.plateau)},
                                            {"reason", r.reason}};
                            };
                            if (!o->json_out.empty()) {
                                json doc = run.report();
                                doc["reference"] = {{"alpha_full", s.reference.alpha_full},
                                                    {"entropy_full", s.reference.entropy_full},
                                                    {"bulk_full", report::to_json(s.reference.bulk_full)},
                                                    {"r_goe", s.reference.r_goe}};
                                doc["m_crit"] = {{"delta", mjson(md)}, {"Delta", mjson(mD)}};
                                doc["wall_time_s"] = run.elapsed();
                                run.outputs.add(o->json_out, doc.dump(2) + "\n");
                            }
                            if (!o->svg.empty()) {
                                svg::Plot p{"convergence", "M", "metric", true, true};
                                p.add({"delta", mcol, s.delta, svg::Style::Line})
                                    .add({"Delta", mcol, s.Delta, svg::Style::Line})
                                    .add({"epsilon", mcol, s.epsilon, svg::Style::Line});
                                run.outputs.add(o->svg, p.render());
                            }
                            std::cout << "converge: " << ms.size() << " points; M_crit(delta)="
                                      << (md.converged ? std::to_string(md.m_crit) : "not converged")
                                      << " M_crit(Delta)="
                                      << (mD.converged ? std::to_string(mD.m_crit) : "not converged") << "\n";
                        }});
}

void ts_command(CLI::App& app, std::vector<Command>& commands) {
    struct Opts {
        Eigen::Index d_in = 1000;
        Eigen::Index n_train = 4000;
        double alpha = 0.25;
        double c = 1.0;
        bool ugd = false;
        double eta = 1e-3;
        int steps = 20000;
        int seeds = 20;
        int points = 200;
        bool raw_scale = false;
        SeedOpts seed;
        std::string out;
        std::string svg;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("ts", "linear teacher-student: gradient descent against gradient-flow theory");
    sub->add_option("--d-in", o->d_in)->check(CLI::PositiveNumber);
    sub->add_option("--n-train", o->n_train)->check(CLI::PositiveNumber);
    auto* alpha = sub->add_option("--alpha", o->alpha);
    auto* c = sub->add_option("--c", o->c)->check(CLI::PositiveNumber);
    auto* ugd = sub->add_flag("--ugd", o->ugd, "identity population covariance");
    alpha->excludes(ugd);
    c->excludes(ugd);
    sub->add_option("--eta", o->eta, "learning rate eta0 (dt = 1)")->check(CLI::PositiveNumber);
    sub->add_option("--steps", o->steps)->check(CLI::NonNegativeNumber);
    sub->add_option("--seeds", o->seeds)->check(CLI::PositiveNumber);
    sub->add_option("--points", o->points, "recorded time points")->check(CLI::PositiveNumber);
    sub->add_flag("--raw-scale", o->raw_scale, "keep the population scale instead of Tr(Sigma)/d = 1");
    o->seed.bind(sub);
    sub->add_option("--out", o->out, "trajectory CSV")->required();
    sub->add_option("--svg", o->svg, "loss curves");
    commands.push_back({sub, [o](Run& run) {
                            TSConfig cfg;
                            cfg.d_in = o->d_in;
                            cfg.n_train = o->n_train;
                            cfg.eta0 = o->eta;
                            cfg.steps = o->steps;
                            cfg.trace_normalize = !o->raw_scale;
                            cfg.cov = o->ugd ? PopulationCovariance<double>::identity(o->d_in, 1.0)
                                             : PopulationCovariance<double>::toeplitz(o->d_in, o->c, o->alpha);
                            const auto rec = record_steps(o->steps, o->points);
                            const std::size_t n = rec.size();
                            std::vector<double> tr(n), gen(n), tra(n), gena(n), tru(n), haar(n), times;
                            for (int s = 0; s < o->seeds; ++s) {
                                cfg.seed = o->seed.rng().derive(static_cast<std::uint64_t>(s));
                                const auto p = make_problem(cfg);
                                auto traj = simulate_gd(p, rec);
                                analytic_flow(p, traj, ProjectionMode::Exact);
                                auto uni = traj;
                                analytic_flow(p, uni, ProjectionMode::Uniform);
                                const auto h = analytic_gen_haar(p, traj.times);
                                times = traj.times;
                                for (std::size_t k = 0; k < n; ++k) {
                                    tr[k] += traj.loss_train_sim[k] / o->seeds;
                                    gen[k] += traj.loss_gen_sim[k] / o->seeds;
                                    tra[k] += traj.loss_train_analytic[k] / o->seeds;
                                    gena[k] += traj.loss_gen_analytic[k] / o->seeds;
                                    tru[k] += uni.loss_train_analytic[k] / o->seeds;
                                    haar[k] += h[k] / o->seeds;
                                }
                            }
                            run.outputs.add(o->out, report::csv_text({"time", "train_sim", "gen_sim", "train_flow",
                                                                      "gen_flow", "train_uniform", "gen_haar"},
                                                                     {times, tr, gen, tra, gena, tru, haar}));
                            if (!o->svg.empty()) {
                                svg::Plot p{"teacher-student losses", "t", "loss", true, true};
                                p.add({"train (GD)", times, tr, svg::Style::Points})
                                    .add({"train (flow)", times, tra})
                                    .add({"gen (GD)", times, gen, svg::Style::Points})
                                    .add({"gen (Haar)", times, haar});
                                run.outputs.add(o->svg, p.render());
                            }
                            std::cout << "ts: " << o->seeds << " seeds, final train loss " << tr.back()
                                      << " (flow " << tra.back() << "), gen " << gen.back() << " (Haar "
                                      << haar.back() << ")\n";
                        }});
}

}  // namespace

void register_commands(CLI::App& app, std::vector<Command>& commands) {
    synth_command(app, commands);
    corrupt_command(app, commands);
    spectrum_command(app, commands);
    rmt_command(app, commands);
    theory_command(app, commands);
    converge_command(app, commands);
    ts_command(app, commands);
}

}  // namespace cli
