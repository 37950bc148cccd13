// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/sampler_procrustes.hpp"

#include <cmath>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

LambdaProposal propose_lambda(const MatchMatrix& lambda, const ProposalConfig& prop, Rng& rng) {
    const std::size_t m = lambda.rows();
    const std::int32_t n = lambda.n_targets;
    LambdaProposal out;
    out.row = std::size_t(rng.uniform_int(m));
    const std::int32_t cur = lambda.assign[out.row];
    if (cur == kUnmatched) {
        out.target = std::int32_t(rng.uniform_int(std::uint64_t(n)));
        out.log_q_ratio = std::log(prop.p_reject * double(n));
    } else if (rng.bernoulli(prop.p_reject)) {
        out.target = kUnmatched;
        out.log_q_ratio = -std::log(prop.p_reject * double(n));
    } else if (n > 1) {
        // uniform over the other N-1 targets
        std::int32_t t = std::int32_t(rng.uniform_int(std::uint64_t(n - 1)));
        if (t >= cur) ++t;
        out.target = t;
        out.log_q_ratio = 0.0;
    } else {
        // N = 1: no other target exists; stay put
        out.target = cur;
        out.log_q_ratio = 0.0;
    }
    return out;
}

MatchMatrix apply_proposal(const MatchMatrix& lambda, const LambdaProposal& prop) {
    MatchMatrix out = lambda;
    out.assign[prop.row] = prop.target;
    return out;
}

double gibbs_tau_from_residual(int p, double d_s2, const ModelConfig& cfg, Rng& rng) {
    if (p <= 1) return rng.gamma(cfg.alpha0, cfg.beta0);  // full conditional degenerates
    const double q = cfg.full_dim_q ? 3.0 * p : double(q_dim(p));
    return rng.gamma(cfg.alpha0 + q / 2.0, cfg.beta0 + d_s2 / 2.0);
}

double gibbs_tau(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                 const ModelConfig& cfg, Rng& rng) {
    const int p = lambda.matched_count();
    double d_s2 = 0.0;
    if (p >= 2) {
        Coords xs, ms;
        extract_matched(x, mu, lambda, xs, ms);
        const ProcrustesFit fit = partial_procrustes(xs, ms);
        d_s2 = fit.distance * fit.distance;
    }
    return gibbs_tau_from_residual(p, d_s2, cfg, rng);
}

ProcrustesChain::ProcrustesChain(const PointSet& x, const PointSet& mu, ModelConfig cfg,
                                 ProposalConfig prop, MatchMatrix init, Rng rng)
    : x_(center(x.coords)),
      mu_(center(mu.coords)),
      cfg_(std::move(cfg)),
      prop_(prop),
      rng_(rng) {
    cfg_.validate();
    prop_.validate();
    if (init.rows() != x.size() || init.n_targets != std::int32_t(mu.size()))
        throw Error("ProcrustesChain: init match matrix dimensions do not fit the data");
    if (!init.valid()) throw Error("ProcrustesChain: invalid init match matrix");
    state_.lambda = std::move(init);
    state_.tau = 1.0;
    refresh_registration();
    update_tau();
}

void ProcrustesChain::refresh_registration() {
    p_ = state_.lambda.matched_count();
    if (p_ <= 1) {
        // no usable registration; the common frame is the centered data
        registered_x_ = x_;
        d_s2_ = 0.0;
        return;
    }
    Coords xs, ms;
    extract_matched(x_, mu_, state_.lambda, xs, ms);
    const ProcrustesFit fit = partial_procrustes(xs, ms);
    d_s2_ = fit.distance * fit.distance;
    RigidTransform t{fit.rotation, fit.translation};
    registered_x_ = apply_transform(x_, t);
}

double ProcrustesChain::target_from(int p, double d_s2) const {
    const std::size_t m = state_.lambda.rows();
    const double n = double(state_.lambda.n_targets);
    double lp = -(double(m) - p) * std::log(cfg_.volume_A);
    if (p >= 2) {
        const double q = cfg_.full_dim_q ? 3.0 * p : double(q_dim(p));
        lp += -(q / 2.0) * kLog2Pi + (q / 2.0) * std::log(state_.tau) - (state_.tau / 2.0) * d_s2;
    }
    if (p > 0) lp += p * std::log((1.0 - cfg_.psi) / n);
    if (int(m) - p > 0) lp += (double(m) - p) * std::log(cfg_.psi);
    return lp;
}

double ProcrustesChain::log_target(const MatchMatrix& lambda) const {
    const int p = lambda.matched_count();
    double d_s2 = 0.0;
    if (p >= 2) {
        Coords xs, ms;
        extract_matched(x_, mu_, lambda, xs, ms);
        const ProcrustesFit fit = partial_procrustes(xs, ms);
        d_s2 = fit.distance * fit.distance;
    }
    return target_from(p, d_s2);
}

double ProcrustesChain::log_target_current() const { return target_from(p_, d_s2_); }

double ProcrustesChain::log_posterior_value() const {
    return target_from(p_, d_s2_) + log_gamma_pdf(state_.tau, cfg_.alpha0, cfg_.beta0);
}

void ProcrustesChain::set_lambda(const MatchMatrix& lambda) {
    state_.lambda = lambda;
    refresh_registration();
}

void ProcrustesChain::set_tau(double tau) {
    if (!(tau > 0.0)) throw Error("set_tau: tau must be > 0");
    state_.tau = tau;
}

void ProcrustesChain::update_tau() {
    state_.tau = gibbs_tau_from_residual(p_, d_s2_, cfg_, rng_);
}

bool ProcrustesChain::mh_lambda_step() {
    ++lambda_stats_.proposed;
    const LambdaProposal prop = propose_lambda(state_.lambda, prop_, rng_);
    const std::int32_t cur = state_.lambda.assign[prop.row];
    if (prop.target == cur) {
        // identical proposal is always accepted and changes nothing
        ++lambda_stats_.accepted;
        return true;
    }

    double log_alpha;
    int p_new = p_;
    double d_s2_new = 0.0;
    if (prop_.use_fast_ratio) {
        // g-weight ratio on the currently registered coordinates
        const Vec3 xi = registered_x_.at(prop.row);
        const Vec3 mu_new =
            prop.target == kUnmatched ? Vec3{} : mu_.at(std::size_t(prop.target));
        const Vec3 mu_old = cur == kUnmatched ? Vec3{} : mu_.at(std::size_t(cur));
        const double g_new = log_g_weight(xi, prop.target == kUnmatched ? nullptr : &mu_new,
                                          state_.tau, state_.lambda.n_targets, cfg_);
        const double g_old = log_g_weight(xi, cur == kUnmatched ? nullptr : &mu_old, state_.tau,
                                          state_.lambda.n_targets, cfg_);
        log_alpha = g_new - g_old + prop.log_q_ratio;
    } else {
        const MatchMatrix cand = apply_proposal(state_.lambda, prop);
        p_new = cand.matched_count();
        if (p_new >= 2) {
            Coords xs, ms;
            extract_matched(x_, mu_, cand, xs, ms);
            const ProcrustesFit fit = partial_procrustes(xs, ms);
            d_s2_new = fit.distance * fit.distance;
        }
        log_alpha = target_from(p_new, d_s2_new) - target_from(p_, d_s2_) + prop.log_q_ratio;
    }

    bool accept = log_alpha >= 0.0;
    if (!accept) accept = std::log(rng_.uniform01()) < log_alpha;  // log(0) = -inf works out
    if (accept) {
        state_.lambda.assign[prop.row] = prop.target;
        // registration is refreshed on every accepted move, per the model
        refresh_registration();
        ++lambda_stats_.accepted;
    }
    return accept;
}

ChainTrace ProcrustesChain::run(const ChainOptions& opts, const GroundTruth* truth) {
    if (opts.n_iter < 1) throw Error("run_chain: n_iter must be >= 1");
    ChainTrace trace;
    trace.smm = SummedMatchMatrix(state_.lambda.rows(), state_.lambda.n_targets);
    for (std::int64_t it = 1; it <= opts.n_iter; ++it) {
        update_tau();
        for (int k = 0; k < prop_.lambda_updates_per_iter; ++k) mh_lambda_step();
        if (it > opts.burn_in) {
            trace.smm.accumulate(state_.lambda);
            if ((it - opts.burn_in) % opts.thin == 0) {
                trace.iteration.push_back(it);
                trace.tau.push_back(state_.tau);
                trace.p.push_back(p_);
                trace.log_post.push_back(log_posterior_value());
            }
        }
        if (opts.check_every > 0 && it % opts.check_every == 0) {
            trace.lambda_checkpoints.emplace_back(it, state_.lambda);
            if (truth)
                trace.correct_counts.emplace_back(it, correct_match_count(state_.lambda, *truth));
        }
    }
    trace.lambda_moves = lambda_stats_;
    trace.final_lambda = state_.lambda;
    trace.final_tau = state_.tau;
    return trace;
}

ChainTrace run_chain(const PointSet& x, const PointSet& mu, const ModelConfig& cfg,
                     const ProposalConfig& prop, const ChainOptions& opts,
                     const MatchMatrix& init, Rng rng, const GroundTruth* truth) {
    ProcrustesChain chain(x, mu, cfg, prop, init, rng);
    return chain.run(opts, truth);
}

}  // namespace pointmatch
