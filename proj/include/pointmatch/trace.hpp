// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pointmatch/model.hpp"

namespace pointmatch {

/// Running sum of match matrices: counts[i][j] is how often row i was
/// assigned to target j (column n_targets = unmatched). Every row of counts
/// sums to total.
struct SummedMatchMatrix {
    std::vector<std::vector<std::int64_t>> counts;
    std::int64_t total = 0;

    SummedMatchMatrix() = default;
    SummedMatchMatrix(std::size_t m, std::int32_t n_targets)
        : counts(m, std::vector<std::int64_t>(std::size_t(n_targets) + 1, 0)) {}

    void accumulate(const MatchMatrix& mm) {
        for (std::size_t i = 0; i < mm.rows(); ++i) {
            const auto a = mm.assign[i];
            ++counts[i][a == kUnmatched ? counts[i].size() - 1 : std::size_t(a)];
        }
        ++total;
    }
};

struct MoveStats {
    std::int64_t proposed = 0;
    std::int64_t accepted = 0;

    double rate() const { return proposed == 0 ? 0.0 : double(accepted) / double(proposed); }
};

/// a-priori correct pairing of a synthetic instance; indices into X and mu.
struct GroundTruth {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (x index, mu index)
    std::vector<std::size_t> unmatched;                      // x indices
};

/// Number of truth pairs present in the match matrix.
inline int correct_match_count(const MatchMatrix& mm, const GroundTruth& truth) {
    int c = 0;
    for (const auto& [xi, mi] : truth.pairs)
        if (mm.assign[xi] == std::int32_t(mi)) ++c;
    return c;
}

struct ChainOptions {
    std::int64_t n_iter = 0;
    std::int64_t burn_in = 0;      // iterations excluded from the summed match matrix
    std::int64_t thin = 1;         // stride for the recorded scalar trace
    std::int64_t check_every = 1000;  // stride for match-matrix checkpoints
};

/// Per-chain record: thinned scalar trace, summed match matrix over every
/// post-burn-in iteration, periodic match-matrix checkpoints, and acceptance
/// counters per move type.
struct ChainTrace {
    std::vector<std::int64_t> iteration;
    std::vector<double> tau;
    std::vector<int> p;
    std::vector<double> log_post;
    std::vector<Pose> pose;  // parallel to the rows above; configuration model only

    SummedMatchMatrix smm;
    std::vector<std::pair<std::int64_t, MatchMatrix>> lambda_checkpoints;
    std::vector<std::pair<std::int64_t, int>> correct_counts;  // when truth was supplied

    MoveStats lambda_moves;
    MoveStats angle_moves;     // configuration model
    MoveStats nearness_moves;  // initialization phase only
    MoveStats rotation_moves;
    MoveStats translation_moves;
    MoveStats flip_moves;

    MatchMatrix final_lambda;
    double final_tau = 0.0;
    std::optional<Pose> final_pose;
};

}  // namespace pointmatch
