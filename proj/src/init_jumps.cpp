// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/init_jumps.hpp"

#include <cmath>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

MatchMatrix rotate_and_rematch(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                               double theta, int axis) {
    const Mat3 r = axis == 0 ? rot_x(theta) : axis == 1 ? rot_y(theta) : rot_z(theta);
    RigidTransform t{r, Vec3{}};
    return nearness(apply_transform(x, t), mu, lambda);
}

}  // namespace

void JumpConfig::validate() const {
    if (p_n < 0 || p_r < 0 || p_t < 0 || p_f < 0 || p_n + p_r + p_t + p_f >= 1.0)
        throw Error("JumpConfig: jump probabilities must be nonnegative and sum below 1");
    if (!(sigma_T > 0.0)) throw Error("JumpConfig: sigma_T must be > 0");
    if (n_settle < 0 || n_initialisation < 0 || delay < 0)
        throw Error("JumpConfig: counts must be nonnegative");
}

MatchMatrix nearness(const Coords& x, const Coords& mu, const MatchMatrix& lambda) {
    MatchMatrix out = lambda;
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < lambda.rows(); ++i) {
        if (!lambda.is_matched(i)) continue;
        const Vec3 p = x.at(i);
        out.assign[i] =
            std::int32_t(k.nearest_index(p.x, p.y, p.z, mu.x(), mu.y(), mu.z(), mu.size(), nullptr));
    }
    return out;
}

MatchMatrix jump_rotation(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Rng& rng) {
    const double theta = rng.uniform(-kPi, kPi);
    const int axis = int(rng.uniform_int(3));
    return rotate_and_rematch(x, mu, lambda, theta, axis);
}

MatchMatrix jump_translation(const Coords& x, const Coords& mu, const MatchMatrix& lambda,
                             double sigma_T, Rng& rng) {
    const Vec3 g = rng.normal3(Vec3{}, sigma_T);
    RigidTransform t{Mat3::identity(), g};
    return nearness(apply_transform(x, t), mu, lambda);
}

MatchMatrix jump_flip(const Coords& x, const Coords& mu, const MatchMatrix& lambda, Rng& rng) {
    const int axis = int(rng.uniform_int(3));
    return rotate_and_rematch(x, mu, lambda, kPi, axis);
}

InitPhaseResult initialization_phase(ProcrustesChain& chain, const JumpConfig& jump_cfg,
                                     std::int64_t check_every, const GroundTruth* truth) {
    jump_cfg.validate();
    InitPhaseResult res;
    const double total_jump = jump_cfg.p_n + jump_cfg.p_r + jump_cfg.p_t + jump_cfg.p_f;
    // first proposal slot is eligible right away (after any configured delay)
    std::int64_t defaults_since_jump = jump_cfg.n_settle;
    Rng& rng = chain.rng();

    for (std::int64_t it = 1; it <= jump_cfg.n_initialisation; ++it) {
        chain.update_tau();

        const bool eligible =
            it > jump_cfg.delay && defaults_since_jump >= jump_cfg.n_settle && total_jump > 0.0;
        int move = 4;  // default
        if (eligible) {
            const double u = rng.uniform01();
            if (u < jump_cfg.p_n)
                move = 0;
            else if (u < jump_cfg.p_n + jump_cfg.p_r)
                move = 1;
            else if (u < jump_cfg.p_n + jump_cfg.p_r + jump_cfg.p_t)
                move = 2;
            else if (u < total_jump)
                move = 3;
        }

        if (move == 4) {
            chain.mh_lambda_step();
            ++res.default_moves.proposed;
            ++defaults_since_jump;
        } else {
            res.defaults_between_jumps.push_back(defaults_since_jump);
            defaults_since_jump = 0;  // reset on proposal, not acceptance
            MatchMatrix cand;
            MoveStats* stats = nullptr;
            switch (move) {
                case 0:
                    cand = nearness(chain.registered_x(), chain.mu(), chain.lambda());
                    stats = &res.nearness_moves;
                    break;
                case 1:
                    cand = jump_rotation(chain.registered_x(), chain.mu(), chain.lambda(), rng);
                    stats = &res.rotation_moves;
                    break;
                case 2:
                    cand = jump_translation(chain.registered_x(), chain.mu(), chain.lambda(),
                                            jump_cfg.sigma_T, rng);
                    stats = &res.translation_moves;
                    break;
                default:
                    cand = jump_flip(chain.registered_x(), chain.mu(), chain.lambda(), rng);
                    stats = &res.flip_moves;
                    break;
            }
            ++stats->proposed;
            const double log_alpha = chain.log_target(cand) - chain.log_target_current();
            bool accept = log_alpha >= 0.0;
            if (!accept) accept = std::log(rng.uniform01()) < log_alpha;
            if (accept) {
                chain.set_lambda(cand);
                ++stats->accepted;
            }
        }

        if (check_every > 0 && it % check_every == 0) {
            res.lambda_checkpoints.emplace_back(it, chain.lambda());
            if (truth)
                res.correct_counts.emplace_back(it, correct_match_count(chain.lambda(), *truth));
        }
    }
    return res;
}

}  // namespace pointmatch
