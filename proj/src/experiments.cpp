// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

void SimConfig::validate() const {
    if (!(L > 0.0)) throw Error("SimConfig: L must be > 0");
    if (!(d_min > 0.0 && d_min < L)) throw Error("SimConfig: require 0 < d_min < L");
    if (M < 1 || N < 1) throw Error("SimConfig: M and N must be >= 1");
    if (n_ones < 0 || n_ones >= M) throw Error("SimConfig: require 0 <= n_ones < M");
    if (n_ones > N) throw Error("SimConfig: n_ones cannot exceed N");
    if (!(s < d_min)) throw Error("SimConfig: require s < d_min");
    if (s < 0.0) throw Error("SimConfig: s must be >= 0");
    if (n_iter < 1 || K < 1) throw Error("SimConfig: n_iter and K must be >= 1");
}

SimInstance resample_x(const SimConfig& sc, const PointSet& mu, Rng& rng) {
    Coords xc;
    std::vector<std::string> ids;
    for (int i = 0; i < sc.M; ++i) {
        if (i < sc.n_ones) {
            xc.push_back(rng.normal3(mu.point(std::size_t(i)), sc.s));
        } else {
            xc.push_back({rng.uniform(-sc.L, sc.L), rng.uniform(-sc.L, sc.L),
                          rng.uniform(-sc.L, sc.L)});
        }
        ids.push_back("x" + std::to_string(i + 1));
    }
    SimInstance inst;
    inst.mu = mu;
    inst.x = PointSet::make(std::move(xc), std::move(ids));
    for (int i = 0; i < sc.n_ones; ++i) inst.truth.pairs.emplace_back(std::size_t(i), std::size_t(i));
    for (int i = sc.n_ones; i < sc.M; ++i) inst.truth.unmatched.push_back(std::size_t(i));
    return inst;
}

SimInstance generate_sim_instance(const SimConfig& sc, Rng& rng) {
    sc.validate();
    constexpr std::int64_t kRetryBudget = 1000000;
    Coords muc;
    std::vector<std::string> ids;
    for (int j = 0; j < sc.N; ++j) {
        bool placed = false;
        for (std::int64_t attempt = 0; attempt < kRetryBudget; ++attempt) {
            const Vec3 cand{rng.uniform(-sc.L, sc.L), rng.uniform(-sc.L, sc.L),
                            rng.uniform(-sc.L, sc.L)};
            bool ok = true;
            for (std::size_t k = 0; k < muc.size(); ++k) {
                if ((muc.at(k) - cand).norm() < sc.d_min) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                muc.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw Error("generate_sim_instance: min-separation packing failed (budget exhausted)");
        ids.push_back("mu" + std::to_string(j + 1));
    }
    const PointSet mu = PointSet::make(std::move(muc), std::move(ids));
    return resample_x(sc, mu, rng);
}

std::int64_t convergence_monitor(const std::vector<std::pair<std::int64_t, int>>& correct_counts,
                                 int threshold) {
    for (const auto& [it, c] : correct_counts)
        if (c >= threshold) return it;
    return -1;
}

std::vector<std::vector<double>> match_probabilities(const SummedMatchMatrix& smm) {
    if (smm.total <= 0) throw Error("match_probabilities: empty accumulator");
    std::vector<std::vector<double>> out(smm.counts.size());
    for (std::size_t i = 0; i < smm.counts.size(); ++i) {
        out[i].resize(smm.counts[i].size());
        for (std::size_t j = 0; j < smm.counts[i].size(); ++j)
            out[i][j] = double(smm.counts[i][j]) / double(smm.total);
    }
    return out;
}

MatchMatrix threshold_match_matrix(const SummedMatchMatrix& smm) {
    if (smm.total <= 0) throw Error("threshold_match_matrix: empty accumulator");
    MatchMatrix out;
    out.n_targets = std::int32_t(smm.counts.empty() ? 0 : smm.counts[0].size() - 1);
    out.assign.resize(smm.counts.size());
    for (std::size_t i = 0; i < smm.counts.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < smm.counts[i].size(); ++j)
            if (smm.counts[i][j] > smm.counts[i][best]) best = j;  // ties keep the lowest index
        out.assign[i] =
            best + 1 == smm.counts[i].size() ? kUnmatched : std::int32_t(best);
    }
    return out;
}

std::vector<SimStudyRow> simulation_study(const SimConfig& sc, ModelKind kind,
                                          const ModelConfig& cfg, const ProposalConfig& prop,
                                          const AngleProposalConfig& angle_prop, const Rng& rng) {
    sc.validate();
    Rng mu_rng = rng.derive(0);
    const SimInstance base = generate_sim_instance(sc, mu_rng);

    std::vector<std::vector<double>> proportions(std::size_t(sc.M));
    for (int k = 0; k < sc.K; ++k) {
        Rng rep_rng = rng.derive(std::uint64_t(k) + 1);
        const SimInstance inst = k == 0 ? base : resample_x(sc, base.mu, rep_rng);

        // start from convergence: the truth matching (and identity pose)
        MatchMatrix init = MatchMatrix::all_unmatched(std::size_t(sc.M), std::int32_t(sc.N));
        for (const auto& [xi, mi] : inst.truth.pairs) init.assign[xi] = std::int32_t(mi);

        ChainOptions opts;
        opts.n_iter = sc.n_iter;
        opts.burn_in = 0;
        opts.thin = sc.n_iter;  // scalar trace not needed here
        opts.check_every = 0;

        Rng chain_rng = rep_rng.derive(777);
        ChainTrace trace;
        if (kind == ModelKind::procrustes) {
            trace = run_chain(inst.x, inst.mu, cfg, prop, opts, init, chain_rng);
        } else {
            trace = run_chain_config(inst.x, inst.mu, cfg, prop, angle_prop, opts, init,
                                     Pose{}, chain_rng);
        }

        for (int i = 0; i < sc.M; ++i) {
            const auto& row = trace.smm.counts[std::size_t(i)];
            const std::int64_t hits = i < sc.n_ones ? row[std::size_t(i)] : row[row.size() - 1];
            proportions[std::size_t(i)].push_back(double(hits) / double(trace.smm.total));
        }
    }

    std::vector<SimStudyRow> rows;
    for (int i = 0; i < sc.M; ++i) {
        const auto& v = proportions[std::size_t(i)];
        SimStudyRow r;
        r.point_index = i;
        r.true_match = i < sc.n_ones;
        double mean = 0.0;
        for (double p : v) mean += p;
        mean /= double(v.size());
        r.mean_proportion = mean;
        if (v.size() >= 2) {
            double ss = 0.0;
            for (double p : v) ss += (p - mean) * (p - mean);
            r.variance = ss / double(v.size() - 1);
        } else {
            r.variance = 0.0;
            r.variance_defined = false;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<LaplacePair> laplace_diagnostic(const Coords& x, const Coords& mu,
                                            const std::vector<MatchMatrix>& candidates, double tau,
                                            const ModelConfig& cfg, std::int64_t n_mc, Rng& rng) {
    if (n_mc < 1000) throw Error("laplace_diagnostic: n_mc must be >= 1000");
    if (!(tau > 0.0)) throw Error("laplace_diagnostic: tau must be > 0");
    cfg.validate();

    // shared pose sample: theta uniform over the Euler box (weighted by
    // cos theta13 below), gamma from its prior
    std::vector<Pose> poses;
    std::vector<double> log_w;  // log cos(theta13)
    poses.reserve(std::size_t(n_mc));
    log_w.reserve(std::size_t(n_mc));
    for (std::int64_t i = 0; i < n_mc; ++i) {
        Pose ps;
        ps.angles.theta12 = rng.uniform(-kPi, kPi);
        ps.angles.theta13 = rng.uniform(-kPi / 2.0, kPi / 2.0);
        ps.angles.theta23 = rng.uniform(-kPi, kPi);
        ps.gamma = rng.normal3(cfg.mu_gamma, cfg.sigma_gamma);
        poses.push_back(ps);
        log_w.push_back(std::log(std::cos(ps.angles.theta13)));
    }
    const double log_w_total = log_sum_exp(log_w);

    std::vector<LaplacePair> out;
    for (const auto& lambda : candidates) {
        if (lambda.rows() != x.size() || lambda.n_targets != std::int32_t(mu.size()))
            throw Error("laplace_diagnostic: candidate dimensions do not fit the data");
        const double base =
            log_gamma_pdf(tau, cfg.alpha0, cfg.beta0) + log_prior_lambda(lambda, cfg);

        Coords xs, ms;
        extract_matched(x, mu, lambda, xs, ms);
        const int p = lambda.matched_count();
        const double uniform_term = -(double(lambda.rows()) - p) * std::log(cfg.volume_A);

        LaplacePair pair;
        if (p == 0) {
            // no pose dependence at all: both reduce to the uniform term
            pair.log_pi_c = base + uniform_term;
            pair.log_pi_p = base + uniform_term;
            pair.mc_se = 0.0;
            out.push_back(pair);
            continue;
        }

        // pi_C: self-normalized importance sample of E_Haar,prior[L]
        std::vector<double> terms(static_cast<std::size_t>(n_mc));
        for (std::int64_t i = 0; i < n_mc; ++i) {
            const Pose& ps = poses[std::size_t(i)];
            const Mat3 rot = euler_to_matrix(ps.angles);
            double r9[9];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) r9[a * 3 + b] = rot(a, b);
            const double tv[3] = {ps.gamma.x, ps.gamma.y, ps.gamma.z};
            const double resid2 = kernels::active().sum_sq_transformed_diff(
                xs.x(), xs.y(), xs.z(), xs.size(), r9, tv, ms.x(), ms.y(), ms.z());
            const double log_lik =
                (1.5 * p) * (std::log(tau) - std::log(2.0 * kPi)) - (tau / 2.0) * resid2;
            terms[std::size_t(i)] = log_w[std::size_t(i)] + log_lik;
        }
        const double log_mean = log_sum_exp(terms) - log_w_total;
        if (!std::isfinite(log_mean))
            throw Error("laplace_diagnostic: Monte-Carlo weights all underflowed");
        pair.log_pi_c = base + uniform_term + log_mean;

        // delta-method se of log(sum w L / sum w)
        {
            double sw = 0.0, swl = 0.0, sq = 0.0;
            const double shift = log_sum_exp(terms);
            for (std::int64_t i = 0; i < n_mc; ++i) {
                const double wl = std::exp(terms[std::size_t(i)] - shift);
                swl += wl;
                sq += wl * wl;
            }
            sw = swl;
            // effective-sample-size style variance of a self-normalized mean
            const double ess = sw * sw / std::max(sq, 1e-300);
            pair.mc_se = 1.0 / std::sqrt(std::max(ess, 1.0));
        }

        // pi_P: likelihood at the Procrustes optimum over (Gamma, gamma)
        double d_s2 = 0.0;
        if (p >= 2) {
            const ProcrustesFit fit = partial_procrustes(xs, ms);
            d_s2 = fit.distance * fit.distance;
        }
        pair.log_pi_p = base + uniform_term +
                        (1.5 * p) * (std::log(tau) - std::log(2.0 * kPi)) - (tau / 2.0) * d_s2;
        out.push_back(pair);
    }
    return out;
}

}  // namespace pointmatch
