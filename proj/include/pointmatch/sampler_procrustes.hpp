// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pointmatch/rng.hpp"
#include "pointmatch/trace.hpp"

namespace pointmatch {

struct ProposalConfig {
    double p_reject = 0.2;        // probability a matched row proposes unmatching
    bool use_fast_ratio = false;  // g-weight acceptance instead of the full re-fit ratio
    int lambda_updates_per_iter = 1;

    void validate() const {
        if (!(p_reject >= 0.0 && p_reject <= 1.0))
            throw Error("ProposalConfig: p_reject must be in [0, 1]");
        if (lambda_updates_per_iter < 1)
            throw Error("ProposalConfig: lambda_updates_per_iter must be >= 1");
    }
};

/// One single-row proposal. target == kUnmatched proposes unmatching;
/// row/target equal to the current assignment only occurs in the N = 1
/// stay-put edge case.
struct LambdaProposal {
    std::size_t row = 0;
    std::int32_t target = kUnmatched;
    double log_q_ratio = 0.0;  // log(q / q*), added to the log posterior ratio
};

/// Three-case kernel: a matched row unmatches with probability
/// p_reject or moves uniformly over the other N-1 targets; an unmatched row
/// matches uniformly over all N. With p_reject = 1/N the q-ratio is exactly 0.
LambdaProposal propose_lambda(const MatchMatrix& lambda, const ProposalConfig& prop, Rng& rng);

MatchMatrix apply_proposal(const MatchMatrix& lambda, const LambdaProposal& prop);

/// Gibbs draw from Gamma(alpha0 + Q/2, beta0 + d_S^2/2) given the residual of
/// the current registration; p <= 1 falls back to the prior.
double gibbs_tau_from_residual(int p, double d_s2, const ModelConfig& cfg, Rng& rng);

/// Convenience form that registers the matched subsets itself.
double gibbs_tau(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                 const ModelConfig& cfg, Rng& rng);

/// Procrustes chain state with cached registration. registered_x is the full
/// configuration mapped by the current fit (identity-centered when p <= 1),
/// which the fast ratio and the big-jump moves read.
class ProcrustesChain {
public:
    ProcrustesChain(const PointSet& x, const PointSet& mu, ModelConfig cfg, ProposalConfig prop,
                    MatchMatrix init, Rng rng);

    /// One MH update of a single row of the match matrix (exact or fast per
    /// config); re-registers on acceptance. Returns the accept flag.
    bool mh_lambda_step();
    /// Gibbs update of tau from the cached residual.
    void update_tau();

    /// n_iter sweeps of (tau, lambda x lambda_updates_per_iter), recording
    /// into a trace. truth enables correct-count checkpoints.
    ChainTrace run(const ChainOptions& opts, const GroundTruth* truth = nullptr);

    const MatchMatrix& lambda() const { return state_.lambda; }
    double tau() const { return state_.tau; }
    int matched_count() const { return p_; }
    double residual2() const { return d_s2_; }
    double log_posterior_value() const;
    const Coords& registered_x() const { return registered_x_; }
    const Coords& x() const { return x_; }
    const Coords& mu() const { return mu_; }
    const ModelConfig& config() const { return cfg_; }
    const ProposalConfig& proposal_config() const { return prop_; }
    Rng& rng() { return rng_; }
    MoveStats& lambda_stats() { return lambda_stats_; }

    /// Replace the match matrix unconditionally and re-register (used by the
    /// burn-in big jumps, which carry their own acceptance rule).
    void set_lambda(const MatchMatrix& lambda);
    /// Pin tau (fixed-tau experiments drive mh_lambda_step directly).
    void set_tau(double tau);

    /// log L + log pi(Lambda) for an arbitrary candidate, sharing this
    /// chain's data and config.
    double log_target(const MatchMatrix& lambda) const;
    /// Same quantity for the current state, from the cached registration.
    double log_target_current() const;

private:
    void refresh_registration();
    double target_from(int p, double d_s2) const;  // log lik + log prior at current tau

    Coords x_, mu_;  // centered copies
    ModelConfig cfg_;
    ProposalConfig prop_;
    ModelState state_;
    Rng rng_;
    int p_ = 0;
    double d_s2_ = 0.0;
    Coords registered_x_;
    MoveStats lambda_stats_;
};

/// Default sweep: one Gibbs tau update then the configured number of
/// single-row lambda updates per iteration, trace recorded after the sweep.
ChainTrace run_chain(const PointSet& x, const PointSet& mu, const ModelConfig& cfg,
                     const ProposalConfig& prop, const ChainOptions& opts,
                     const MatchMatrix& init, Rng rng, const GroundTruth* truth = nullptr);

}  // namespace pointmatch
