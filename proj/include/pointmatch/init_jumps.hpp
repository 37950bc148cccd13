// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pointmatch/sampler_procrustes.hpp"

namespace pointmatch {

/// Burn-in big-jump schedule. All four moves are non-reversible, so they run
/// only during the initialization phase and none of its samples feed
/// inference.
struct JumpConfig {
    double p_n = 0.001;  // nearness
    double p_r = 0.02;   // rotation
    double p_t = 0.09;   // translation
    double p_f = 0.01;   // flip
    double sigma_T = 2.2;            // sd of translation jumps
    std::int64_t n_settle = 850;     // min default updates between jump proposals
    std::int64_t n_initialisation = 1000000;
    std::int64_t delay = 0;          // iterations before the first jump is allowed

    void validate() const;
};

/// Re-match every matched row to its nearest mu point (lowest index on ties);
/// unmatched rows stay unmatched, so the matched count is preserved. x is
/// read in whatever frame the caller registered it to.
MatchMatrix nearness(const Coords& x, const Coords& mu, const MatchMatrix& lambda);

/// Rotate x by a uniform angle about a uniformly chosen coordinate axis, then
/// apply nearness.
MatchMatrix jump_rotation(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Rng& rng);

/// Translate x by gamma ~ N3(0, sigma_T^2 I), then apply nearness.
MatchMatrix jump_translation(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                             double sigma_T, Rng& rng);

/// Rotation jump with the angle fixed at pi.
MatchMatrix jump_flip(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Rng& rng);

struct InitPhaseResult {
    MoveStats nearness_moves;
    MoveStats rotation_moves;
    MoveStats translation_moves;
    MoveStats flip_moves;
    MoveStats default_moves;
    std::vector<std::pair<std::int64_t, MatchMatrix>> lambda_checkpoints;
    std::vector<std::pair<std::int64_t, int>> correct_counts;
    /// gap (in default updates) between consecutive big-jump proposals, for
    /// schedule verification
    std::vector<std::int64_t> defaults_between_jumps;
};

/// Runs the chain for n_initialisation iterations, interleaving Gibbs tau and
/// default row updates with occasional big jumps once at least n_settle
/// default updates have been proposed since the last jump proposal. Jumps are
/// accepted with min{1, pi(Lambda*)/pi(Lambda)} (no q-ratio), both sides
/// freshly registered. The chain is left positioned for the reversible phase.
InitPhaseResult initialization_phase(ProcrustesChain& chain, const JumpConfig& jump_cfg,
                                     std::int64_t check_every = 1000,
                                     const GroundTruth* truth = nullptr);

}  // namespace pointmatch
