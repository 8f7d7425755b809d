#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectralens/errors.hpp"
#include "spectralens/parallel.hpp"
#include "spectralens/rng.hpp"
#include "spectralens/spectra.hpp"
#include "spectralens/synth.hpp"
#include "spectralens/theory.hpp"

namespace spectralens {

/// Linear teacher-student regression trained by full-batch gradient descent
/// on n_train Gaussian samples. The discrete step is eta = eta0 * dt and
/// time advances by dt per step.
struct TSConfig {
    Eigen::Index d_in = 1000;
    Eigen::Index n_train = 4000;
    double eta0 = 1e-3;
    double dt = 1.0;
    int steps = 20000;
    PopulationCovariance<double> cov = PopulationCovariance<double>::toeplitz(1000, 1.0, 0.25);
    RngSeed seed{};
    /// Rescale the population so that Tr(Sigma_pop) / d_in = 1.
    bool trace_normalize = true;
    /// Reserved; the update carries no decay term.
    double weight_decay = 0.0;
    bool check_stability = true;

    [[nodiscard]] double eta() const { return eta0 * dt; }
    [[nodiscard]] double ratio() const { return static_cast<double>(d_in) / static_cast<double>(n_train); }
};

/// One realization: training Gram matrix, population covariance and the
/// initial error Delta_0 = w_0 - w*.
struct TSProblem {
    TSConfig cfg;
    Eigen::MatrixXd sigma_train;
    Eigen::MatrixXd sigma_pop;
    Eigen::VectorXd delta0;
    EigenPairs<double> train_eigen;
    double lambda_max = 0.0;

    [[nodiscard]] double stability_bound() const { return 1.0 / (2.0 * lambda_max); }
};

inline void validate(const TSConfig& cfg) {
    if (cfg.d_in < 1 || cfg.n_train < 1) {
        throw InvalidArgument("teacher-student: d_in and n_train must be >= 1");
    }
    if (cfg.cov.d() != cfg.d_in) {
        throw InvalidArgument("teacher-student: covariance dimension " + std::to_string(cfg.cov.d()) +
                              " does not match d_in " + std::to_string(cfg.d_in));
    }
    if (!(cfg.eta0 > 0) || !(cfg.dt > 0)) {
        throw InvalidArgument("teacher-student: eta0 and dt must be positive");
    }
    if (cfg.steps < 0) {
        throw InvalidArgument("teacher-student: steps must be >= 0");
    }
    if (cfg.weight_decay != 0.0) {
        throw InvalidArgument("teacher-student: weight decay is not supported");
    }
}

/// Draw the training set and the teacher/student weights,
/// w0, w* ~ N(0, 1 / (2 d_in)) so that E|Delta_0|^2 = 1.
inline TSProblem make_problem(const TSConfig& cfg) {
    validate(cfg);
    TSProblem p;
    p.cfg = cfg;
    const auto cov = cfg.trace_normalize ? cfg.cov.trace_normalized() : cfg.cov;
    p.cfg.cov = cov;
    p.sigma_pop = cov.singular_values().asDiagonal();
    if (cfg.n_train >= 2) {
        p.sigma_train = gram(sample_gaussian(cov, cfg.n_train, cfg.seed.derive(1)).values());
    } else {
        Eigen::VectorXd x(cfg.d_in);
        Philox rng(cfg.seed.derive(1), 0);
        for (Eigen::Index i = 0; i < cfg.d_in; ++i) {
            x(i) = std::sqrt(cov.singular_values()(i)) * rng.normal();
        }
        p.sigma_train = x * x.transpose();
    }
    Philox student(cfg.seed.derive(2), 0), teacher(cfg.seed.derive(2), 1);
    const double sd = std::sqrt(1.0 / (2.0 * static_cast<double>(cfg.d_in)));
    p.delta0.resize(cfg.d_in);
    for (Eigen::Index i = 0; i < cfg.d_in; ++i) {
        p.delta0(i) = sd * student.normal() - sd * teacher.normal();
    }
    p.train_eigen = eigen_decomposition(p.sigma_train);
    p.train_eigen.values = p.train_eigen.values.cwiseMax(0.0);
    p.lambda_max = p.train_eigen.values(0);
    if (cfg.check_stability && !(cfg.eta() < p.stability_bound())) {
        throw InvalidArgument("teacher-student: eta = " + std::to_string(cfg.eta()) +
                              " is not below the stability bound 1/(2 lambda_max) = " +
                              std::to_string(p.stability_bound()));
    }
    return p;
}

/// Uniformly random orthogonal matrix: QR of a Gaussian matrix with the
/// signs of diag(R) folded into Q.
inline Eigen::MatrixXd haar_orthogonal(Eigen::Index d, RngSeed seed) {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Philox rng(seed, static_cast<std::uint64_t>(j));
        for (Eigen::Index i = 0; i < d; ++i) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (r(j, j) < 0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

struct TrajectoryPair {
    std::vector<double> times;
    std::vector<int> steps;
    std::vector<double> loss_train_sim, loss_gen_sim;
    std::vector<double> loss_train_analytic, loss_gen_analytic;
};

/// Step 0, then about `points` log-spaced steps up to `steps`.
inline std::vector<int> record_steps(int steps, int points = 200) {
    std::vector<int> out{0};
    if (steps <= 0) {
        return out;
    }
    for (int k = 0; k < points; ++k) {
        const int s = static_cast<int>(std::llround(std::pow(static_cast<double>(steps), (k + 1.0) / points)));
        if (s > out.back()) {
            out.push_back(s);
        }
    }
    if (out.back() != steps) {
        out.push_back(steps);
    }
    return out;
}

/// Iterate Delta <- (I - 2 eta Sigma_train) Delta and record
/// L_train = Delta^T Sigma_train Delta, L_gen = Delta^T Sigma_pop Delta.
inline TrajectoryPair simulate_gd(const TSProblem& p, const std::vector<int>& record) {
    TrajectoryPair out;
    const double eta = p.cfg.eta();
    Eigen::VectorXd delta = p.delta0;
    auto quad = [](const Eigen::MatrixXd& a, const Eigen::VectorXd& v) { return v.dot(a * v); };
    const double start = quad(p.sigma_train, delta);
    int step = 0;
    for (int target : record) {
        for (; step < target; ++step) {
            delta -= 2.0 * eta * (p.sigma_train * delta);
        }
        const double lt = quad(p.sigma_train, delta);
        if (start > 0 && lt > 10.0 * start) {
            throw DivergenceError("simulate_gd: training loss grew tenfold by step " + std::to_string(step) +
                                  "; eta must stay below 1/(2 lambda_max) = " + std::to_string(p.stability_bound()));
        }
        out.steps.push_back(target);
        out.times.push_back(target * p.cfg.dt);
        out.loss_train_sim.push_back(lt);
        out.loss_gen_sim.push_back(quad(p.sigma_pop, delta));
    }
    return out;
}

enum class ProjectionMode { Exact, Uniform };

/// Gradient-flow losses at the given times. Exact mode projects the realized
/// Delta_0 on the eigenvectors of Sigma_train; Uniform mode gives every
/// eigenvector the same projection, with E|Delta_0|^2 = 1.
inline void analytic_flow(const TSProblem& p, TrajectoryPair& traj, ProjectionMode mode) {
    const auto& nu = p.train_eigen.values;
    const auto d = static_cast<double>(nu.size());
    const double eta0 = p.cfg.eta0;
    traj.loss_train_analytic.assign(traj.times.size(), 0.0);
    traj.loss_gen_analytic.assign(traj.times.size(), 0.0);
    if (mode == ProjectionMode::Exact) {
        const Eigen::VectorXd proj = p.train_eigen.vectors.transpose() * p.delta0;
        parallel_for(traj.times.size(), [&](std::size_t k) {
            const double t = traj.times[k];
            const Eigen::VectorXd decay = (-2.0 * eta0 * t * nu.array()).exp();
            const Eigen::VectorXd q = decay.cwiseProduct(proj);
            traj.loss_train_analytic[k] = q.cwiseProduct(q).dot(nu);
            const Eigen::VectorXd delta = p.train_eigen.vectors * q;
            traj.loss_gen_analytic[k] = delta.dot(p.sigma_pop * delta);
        });
        return;
    }
    // weight of each eigenvector in the generalization loss: v_i^T Sigma_pop v_i
    const Eigen::ArrayXd pop =
        (p.train_eigen.vectors.transpose() * p.sigma_pop * p.train_eigen.vectors).diagonal().array();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const Eigen::ArrayXd decay = (-4.0 * eta0 * traj.times[k] * nu.array()).exp();
        traj.loss_train_analytic[k] = (decay * nu.array()).sum() / d;
        traj.loss_gen_analytic[k] = (decay * pop).sum() / d;
    }
}

/// Generalization loss averaged over the relative orientation of Sigma_pop:
/// (Tr Sigma_pop / d) (1/d) sum_i exp(-4 eta0 nu_i t).
inline std::vector<double> analytic_gen_haar(const TSProblem& p, std::span<const double> times) {
    const auto& nu = p.train_eigen.values;
    const auto d = static_cast<double>(nu.size());
    const double pop = p.sigma_pop.trace() / d;
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(pop * (-4.0 * p.cfg.eta0 * t * nu.array()).exp().sum() / d);
    }
    return out;
}

/// Same average with the empirical eigenvalues replaced by a spectral
/// density: (Tr Sigma_pop / d) * int rho(nu) exp(-4 eta0 nu t) dnu.
inline std::vector<double> analytic_gen_density(const TSProblem& p, const StieltjesSolution& density,
                                                std::span<const double> times) {
    const double pop = p.sigma_pop.trace() / static_cast<double>(p.cfg.d_in);
    const double mass = density.mass();
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < density.lambda.size(); ++k) {
            const double f0 = density.density[k] * std::exp(-4.0 * p.cfg.eta0 * t * density.lambda[k]);
            const double f1 = density.density[k + 1] * std::exp(-4.0 * p.cfg.eta0 * t * density.lambda[k + 1]);
            acc += 0.5 * (f0 + f1) * (density.lambda[k + 1] - density.lambda[k]);
        }
        out.push_back(pop * acc / mass);
    }
    return out;
}

}  // namespace spectralens
