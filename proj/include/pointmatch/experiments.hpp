// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pointmatch/init_jumps.hpp"
#include "pointmatch/sampler_config.hpp"

namespace pointmatch {

/// Synthetic-instance generator parameters: mu is N points uniform on the
/// cube [-L, L]^3 with pairwise separation >= d_min; the first n_ones rows of
/// X perturb the corresponding mu rows with sd s, the rest are uniform.
struct SimConfig {
    double L = 10.0;
    double d_min = 2.0;
    int M = 20;
    int N = 24;
    int n_ones = 12;
    double s = 0.1;
    std::int64_t n_iter = 100000;  // post-convergence iterations per replicate
    int K = 100;                   // replicates (X resampled, mu held fixed)

    void validate() const;
};

struct SimInstance {
    PointSet mu;
    PointSet x;
    GroundTruth truth;
};

/// Step-2 generator. Throws if the min-separation rejection sampling exceeds
/// its retry budget (1e6 draws per point).
SimInstance generate_sim_instance(const SimConfig& sc, Rng& rng);

/// Resample X only (Step 4), against an existing mu.
SimInstance resample_x(const SimConfig& sc, const PointSet& mu, Rng& rng);

/// Earliest checkpointed iteration at which the correct-match count reached
/// the threshold; -1 if never. Checkpoints are (iteration, count) pairs as
/// recorded by the chains every check_every iterations.
std::int64_t convergence_monitor(const std::vector<std::pair<std::int64_t, int>>& correct_counts,
                                 int threshold);

/// counts / total; every row sums to 1.
std::vector<std::vector<double>> match_probabilities(const SummedMatchMatrix& smm);

/// Row-wise argmax of the summed matrix (ties to the lowest column); the last
/// column maps to kUnmatched.
MatchMatrix threshold_match_matrix(const SummedMatchMatrix& smm);

/// Per-point result of the simulation study: for i < n_ones the proportion of
/// iterations with (X)_i matched to (mu)_i, otherwise the proportion
/// unmatched; mean and variance over the K replicates.
struct SimStudyRow {
    int point_index = 0;       // 0-based row of X
    bool true_match = false;   // row was generated as a perturbed mu point
    double mean_proportion = 0.0;
    double variance = 0.0;     // 0 when K == 1 (flagged by variance_defined)
    bool variance_defined = true;
};

/// Steps 3-5 for one s value: K replicates, each started from the truth
/// match (and identity pose for the configuration model), run n_iter
/// iterations with every match matrix counted. Replicate r uses the stream
/// derived from (rng, r), so results do not depend on execution order.
std::vector<SimStudyRow> simulation_study(const SimConfig& sc, ModelKind kind,
                                          const ModelConfig& cfg, const ProposalConfig& prop,
                                          const AngleProposalConfig& angle_prop, const Rng& rng);

/// One candidate's pair of marginal log-posteriors of (Lambda, tau): pi_C by
/// Monte-Carlo integration over the pose, pi_P by Procrustes optimization.
struct LaplacePair {
    double log_pi_c = 0.0;
    double log_pi_p = 0.0;
    double mc_se = 0.0;  // delta-method standard error of log_pi_c
};

/// For each candidate match matrix, pi_C integrates the configuration
/// posterior over (Gamma, gamma) by self-normalized importance sampling
/// (Euler box draws weighted by cos theta13, gamma from its prior) and pi_P
/// takes the likelihood at the partial Procrustes optimum. Throws if every
/// Monte-Carlo weight underflows.
std::vector<LaplacePair> laplace_diagnostic(const Coords& x, const Coords& mu,
                                            const std::vector<MatchMatrix>& candidates, double tau,
                                            const ModelConfig& cfg, std::int64_t n_mc, Rng& rng);

}  // namespace pointmatch
