// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/model.hpp"

#include <cmath>
#include <limits>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

inline double neg_inf() { return -std::numeric_limits<double>::infinity(); }

int q_effective(int p, const ModelConfig& cfg) { return cfg.full_dim_q ? 3 * p : q_dim(p); }

}  // namespace

void ModelConfig::validate() const {
    if (!(alpha0 > 0.0)) throw Error("ModelConfig: alpha0 must be > 0");
    if (!(beta0 > 0.0)) throw Error("ModelConfig: beta0 must be > 0");
    if (!(psi >= 0.0 && psi <= 1.0)) throw Error("ModelConfig: psi must be in [0, 1]");
    if (!(volume_A > 0.0)) throw Error("ModelConfig: volume_A must be > 0");
    if (!(sigma_gamma > 0.0)) throw Error("ModelConfig: sigma_gamma must be > 0");
}

int q_dim(int p, int m) { return p * m - m * (m - 1) / 2 - m; }

void extract_matched(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Coords& x_sub,
                     Coords& mu_sub) {
    x_sub = Coords();
    mu_sub = Coords();
    for (std::size_t i = 0; i < lambda.rows(); ++i) {
        const auto a = lambda.assign[i];
        if (a == kUnmatched) continue;
        x_sub.push_back(x.at(i));
        mu_sub.push_back(mu.at(std::size_t(a)));
    }
}

double log_lik_procrustes(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                          double tau, const ModelConfig& cfg) {
    if (!(tau > 0.0)) throw Error("log_lik_procrustes: tau must be > 0");
    const int m_rows = int(lambda.rows());
    const int p = lambda.matched_count();
    double ll = -(double(m_rows - p)) * std::log(cfg.volume_A);
    if (p >= 2) {
        Coords xs, ms;
        extract_matched(x, mu, lambda, xs, ms);
        const ProcrustesFit fit = partial_procrustes(xs, ms);
        const double q = q_effective(p, cfg);
        ll += -(q / 2.0) * kLog2Pi + (q / 2.0) * std::log(tau) -
              (tau / 2.0) * fit.distance * fit.distance;
    }
    return ll;
}

double log_lik_config(const Coords& x, const Coords& mu, const MatchMatrix& lambda, double tau,
                      const Pose& pose, const ModelConfig& cfg) {
    if (!(tau > 0.0)) throw Error("log_lik_config: tau must be > 0");
    const int m_rows = int(lambda.rows());
    const int p = lambda.matched_count();
    double ll = -(double(m_rows - p)) * std::log(cfg.volume_A);
    if (p >= 1) {
        Coords xs, ms;
        extract_matched(x, mu, lambda, xs, ms);
        const Mat3 rot = euler_to_matrix(pose.angles);
        double r9[9];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r9[i * 3 + j] = rot(i, j);
        const double t[3] = {pose.gamma.x, pose.gamma.y, pose.gamma.z};
        const double resid2 = kernels::active().sum_sq_transformed_diff(
            xs.x(), xs.y(), xs.z(), xs.size(), r9, t, ms.x(), ms.y(), ms.z());
        ll += (3.0 * p / 2.0) * (std::log(tau) - kLog2Pi) - (tau / 2.0) * resid2;
    }
    return ll;
}

double log_prior_lambda(const MatchMatrix& lambda, const ModelConfig& cfg) {
    const int m_rows = int(lambda.rows());
    const int p = lambda.matched_count();
    const double n = double(lambda.n_targets);
    double lp = 0.0;
    if (p > 0) lp += p * std::log((1.0 - cfg.psi) / n);
    if (m_rows - p > 0) lp += (m_rows - p) * std::log(cfg.psi);
    return lp;  // -inf falls out of log(0) when psi is 0 or 1 with incompatible p
}

double log_posterior(const ModelState& state, const Coords& x, const Coords& mu,
                     const ModelConfig& cfg, ModelKind kind) {
    if (!(state.tau > 0.0)) return neg_inf();
    double lp = log_gamma_pdf(state.tau, cfg.alpha0, cfg.beta0) + log_prior_lambda(state.lambda, cfg);
    if (kind == ModelKind::procrustes) {
        lp += log_lik_procrustes(x, mu, state.lambda, state.tau, cfg);
    } else {
        if (!state.pose) throw Error("log_posterior: configuration state requires a pose");
        lp += log_lik_config(x, mu, state.lambda, state.tau, *state.pose, cfg);
        lp += log_normal3_pdf(state.pose->gamma, cfg.mu_gamma, cfg.sigma_gamma);
        lp += haar_log_density(state.pose->angles);
    }
    return lp;
}

double log_g_weight(const Vec3& x, const Vec3* mu_or_null, double tau, int n_targets,
                    const ModelConfig& cfg) {
    if (mu_or_null == nullptr) return std::log(cfg.psi) - std::log(cfg.volume_A);
    const double d2 = (x - *mu_or_null).norm2();
    return std::log((1.0 - cfg.psi) / double(n_targets)) + 1.5 * (std::log(tau) - kLog2Pi) -
           (tau / 2.0) * d2;
}

double log_gamma_pdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return neg_inf();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_normal3_pdf(const Vec3& x, const Vec3& mean, double sd) {
    const double d2 = (x - mean).norm2();
    return -1.5 * (kLog2Pi + 2.0 * std::log(sd)) - d2 / (2.0 * sd * sd);
}

}  // namespace pointmatch
