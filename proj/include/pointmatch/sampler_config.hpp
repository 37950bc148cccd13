// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pointmatch/rng.hpp"
#include "pointmatch/sampler_procrustes.hpp"
#include "pointmatch/trace.hpp"

namespace pointmatch {

/// Half-widths of the uniform Euler-angle perturbations.
struct AngleProposalConfig {
    double width12 = 0.2;
    double width13 = 0.1;
    double width23 = 0.2;

    void validate() const {
        if (!(width12 > 0.0 && width13 > 0.0 && width23 > 0.0))
            throw Error("AngleProposalConfig: widths must be > 0");
    }
};

/// Gibbs draw from Gamma(alpha0 + 3p/2, beta0 + |X~ - mu|^2 / 2); p = 0
/// reduces to the prior through the same formula.
double gibbs_tau_config(int p, double resid2, const ModelConfig& cfg, Rng& rng);

/// Full-conditional draw of the translation,
///   N( (mu_g / sg^2 + tau sum(mu_k - x_j Gamma)) / (p tau + 1/sg^2),
///      I / (p tau + 1/sg^2) ).
Vec3 gibbs_gamma(const Coords& x, const Coords& mu, const MatchMatrix& lambda, double tau,
                 const Mat3& rotation, const ModelConfig& cfg, Rng& rng);

/// Configuration-model chain: Gibbs tau, Gibbs gamma, MH on the Euler angles
/// (Haar-corrected through the angle-coordinate posterior), and the
/// match-matrix update whose g-weight ratio is exact for this model.
class ConfigChain {
public:
    ConfigChain(const PointSet& x, const PointSet& mu, ModelConfig cfg, ProposalConfig prop,
                AngleProposalConfig angle_prop, MatchMatrix init_lambda, Pose init_pose, Rng rng);

    void update_tau();
    void set_tau(double tau);
    void update_gamma();
    /// Joint uniform perturbation of the three angles; theta13 proposals
    /// leaving [-pi/2, pi/2] are rejected outright. Returns the accept flag.
    bool mh_angles_step();
    /// Single-row match-matrix update via g-weights on the transformed X.
    bool mh_lambda_step();

    ChainTrace run(const ChainOptions& opts, const GroundTruth* truth = nullptr);

    const MatchMatrix& lambda() const { return state_.lambda; }
    const Pose& pose() const { return *state_.pose; }
    double tau() const { return state_.tau; }
    int matched_count() const { return p_; }
    double log_posterior_value() const;
    Rng& rng() { return rng_; }

private:
    void refresh_pose_cache();  // rotation matrix + transformed X + residual

    Coords x_, mu_;
    ModelConfig cfg_;
    ProposalConfig prop_;
    AngleProposalConfig angle_prop_;
    ModelState state_;
    Rng rng_;
    int p_ = 0;
    Mat3 rotation_ = Mat3::identity();
    Coords x_transformed_;  // X Gamma + 1 gamma^T, all rows
    double resid2_ = 0.0;   // over matched rows
    MoveStats lambda_stats_, angle_stats_;
};

ChainTrace run_chain_config(const PointSet& x, const PointSet& mu, const ModelConfig& cfg,
                            const ProposalConfig& prop, const AngleProposalConfig& angle_prop,
                            const ChainOptions& opts, const MatchMatrix& init_lambda,
                            const Pose& init_pose, Rng rng, const GroundTruth* truth = nullptr);

}  // namespace pointmatch
