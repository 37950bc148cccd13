// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pointmatch/geom.hpp"

namespace pointmatch {

/// Sentinel for an unmatched row (the last column of the match matrix).
inline constexpr std::int32_t kUnmatched = -1;

/// Row-assignment form of the M x (N+1) match matrix: assign[i] is the
/// matched target index in [0, n_targets) or kUnmatched. Rows are
/// independent; many-to-one matches are allowed.
struct MatchMatrix {
    std::vector<std::int32_t> assign;
    std::int32_t n_targets = 0;

    static MatchMatrix all_unmatched(std::size_t m, std::int32_t n_targets) {
        MatchMatrix mm;
        mm.assign.assign(m, kUnmatched);
        mm.n_targets = n_targets;
        return mm;
    }

    std::size_t rows() const { return assign.size(); }
    bool is_matched(std::size_t i) const { return assign[i] != kUnmatched; }

    /// p = number of matched rows.
    int matched_count() const {
        int p = 0;
        for (auto a : assign) p += (a != kUnmatched);
        return p;
    }

    bool valid() const {
        for (auto a : assign)
            if (a != kUnmatched && (a < 0 || a >= n_targets)) return false;
        return true;
    }

    bool operator==(const MatchMatrix& o) const = default;
};

/// Pose of the configuration model: explicit rotation (Euler angles) and
/// translation, sampled rather than optimized away.
struct Pose {
    EulerAngles angles;
    Vec3 gamma{};
};

struct ModelConfig {
    double alpha0 = 1.0;     // Gamma shape for tau
    double beta0 = 36.0;     // Gamma rate for tau
    double psi = 0.2;        // prior probability a row is unmatched
    double volume_A = 1.0;   // volume of the uniform region for unmatched points
    Vec3 mu_gamma{};         // prior mean of the translation
    double sigma_gamma = 50.0;  // prior sd of the translation
    bool full_dim_q = false;   // Q = 3p: keep the registration dimensions

    void validate() const;
};

enum class ModelKind { procrustes, configuration };

struct ModelState {
    MatchMatrix lambda;
    double tau = 1.0;
    std::optional<Pose> pose;  // present iff configuration model
};

/// Effective Gaussian dimension after removing the rotation/translation
/// constraints: p*m - m(m-1)/2 - m. May be <= 0 for p <= 1.
int q_dim(int p, int m = 3);

/// Gathers the matched rows of X and their targets in mu, in row order of X.
void extract_matched(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Coords& x_sub,
                     Coords& mu_sub);

/// Procrustes size-and-shape log-likelihood
///   (-Q/2) log(2 pi) + (Q/2) log tau - (tau/2) d_S^2 - (M - p) log|A|,
/// with d_S from the partial Procrustes registration of the matched subsets.
/// For p <= 1 the Gaussian factor is defined as 1 (no shape information), so
/// only the uniform term remains.
double log_lik_procrustes(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                          double tau, const ModelConfig& cfg);

/// Configuration log-likelihood
///   (3p/2) log(tau/(2 pi)) - (tau/2) |X Gamma + 1 gamma^T - mu|^2 - (M - p) log|A|
/// over the matched rows, with the pose applied to X.
double log_lik_config(const Coords& x, const Coords& mu, const MatchMatrix& lambda, double tau,
                      const Pose& pose, const ModelConfig& cfg);

/// Row-independent match prior: p log((1-psi)/N) + (M-p) log psi.
double log_prior_lambda(const MatchMatrix& lambda, const ModelConfig& cfg);

/// Unnormalized log-posterior. Configuration states add the translation's
/// Normal prior and the Haar density in Euler-angle coordinates (the
/// cos(theta13) Jacobian lives there; MH angle ratios are plain posterior
/// ratios in these coordinates).
double log_posterior(const ModelState& state, const Coords& x, const Coords& mu,
                     const ModelConfig& cfg, ModelKind kind);

/// Single-row weight of the fast match-matrix ratio: for a matched target,
/// log((1-psi)/N) + (3/2) log(tau/(2 pi)) - (tau/2) |x - mu_j|^2; for
/// mu_or_null == nullptr (unmatched), log(psi) - log|A|. n_targets is N.
double log_g_weight(const Vec3& x, const Vec3* mu_or_null, double tau, int n_targets,
                    const ModelConfig& cfg);

double log_gamma_pdf(double x, double shape, double rate);
double log_normal3_pdf(const Vec3& x, const Vec3& mean, double sd);

}  // namespace pointmatch
