// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/sampler_config.hpp"

#include <cmath>

#include "pointmatch/kernels.hpp"

namespace pointmatch {
namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double wrap_pi(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace

double gibbs_tau_config(int p, double resid2, const ModelConfig& cfg, Rng& rng) {
    return rng.gamma(cfg.alpha0 + 1.5 * double(p), cfg.beta0 + resid2 / 2.0);
}

Vec3 gibbs_gamma(const Coords& x, const Coords& mu, const MatchMatrix& lambda, double tau,
                 const Mat3& rotation, const ModelConfig& cfg, Rng& rng) {
    Vec3 sum{};
    int p = 0;
    for (std::size_t j = 0; j < lambda.rows(); ++j) {
        const auto a = lambda.assign[j];
        if (a == kUnmatched) continue;
        sum += mu.at(std::size_t(a)) - rotation.apply_row(x.at(j));
        ++p;
    }
    const double prior_prec = 1.0 / (cfg.sigma_gamma * cfg.sigma_gamma);
    const double prec = double(p) * tau + prior_prec;
    const Vec3 mean = (cfg.mu_gamma * prior_prec + sum * tau) / prec;
    return rng.normal3(mean, std::sqrt(1.0 / prec));
}

ConfigChain::ConfigChain(const PointSet& x, const PointSet& mu, ModelConfig cfg,
                         ProposalConfig prop, AngleProposalConfig angle_prop,
                         MatchMatrix init_lambda, Pose init_pose, Rng rng)
    : x_(x.coords), mu_(mu.coords), cfg_(std::move(cfg)), prop_(prop), angle_prop_(angle_prop),
      rng_(rng) {
    cfg_.validate();
    prop_.validate();
    angle_prop_.validate();
    if (init_lambda.rows() != x.size() || init_lambda.n_targets != std::int32_t(mu.size()))
        throw Error("ConfigChain: init match matrix dimensions do not fit the data");
    if (!init_lambda.valid()) throw Error("ConfigChain: invalid init match matrix");
    if (!init_pose.angles.in_range()) throw Error("ConfigChain: init pose angles out of range");
    state_.lambda = std::move(init_lambda);
    state_.pose = init_pose;
    state_.tau = 1.0;
    refresh_pose_cache();
    update_tau();
}

void ConfigChain::refresh_pose_cache() {
    rotation_ = euler_to_matrix(state_.pose->angles);
    RigidTransform t{rotation_, state_.pose->gamma};
    x_transformed_ = apply_transform(x_, t);
    p_ = state_.lambda.matched_count();
    resid2_ = 0.0;
    if (p_ > 0) {
        Coords xs, ms;
        extract_matched(x_transformed_, mu_, state_.lambda, xs, ms);
        resid2_ = kernels::active().sum_sq_paired_diff(xs.x(), xs.y(), xs.z(), ms.x(), ms.y(),
                                                       ms.z(), xs.size());
    }
}

void ConfigChain::update_tau() { state_.tau = gibbs_tau_config(p_, resid2_, cfg_, rng_); }

void ConfigChain::set_tau(double tau) {
    if (!(tau > 0.0)) throw Error("set_tau: tau must be > 0");
    state_.tau = tau;
}

void ConfigChain::update_gamma() {
    state_.pose->gamma = gibbs_gamma(x_, mu_, state_.lambda, state_.tau, rotation_, cfg_, rng_);
    refresh_pose_cache();
}

bool ConfigChain::mh_angles_step() {
    ++angle_stats_.proposed;
    const EulerAngles cur = state_.pose->angles;
    const double t13 = cur.theta13 + rng_.uniform(-angle_prop_.width13, angle_prop_.width13);
    const double t12 = wrap_pi(cur.theta12 + rng_.uniform(-angle_prop_.width12, angle_prop_.width12));
    const double t23 = wrap_pi(cur.theta23 + rng_.uniform(-angle_prop_.width23, angle_prop_.width23));
    if (t13 < -kPi / 2.0 || t13 > kPi / 2.0) return false;  // outright rejection, by design
    const EulerAngles prop_angles{t12, t13, t23};

    // log ratio = likelihood ratio + Haar (cosine) ratio, everything else fixed
    const Mat3 rot_new = euler_to_matrix(prop_angles);
    double r9[9];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r9[i * 3 + j] = rot_new(i, j);
    const double tvec[3] = {state_.pose->gamma.x, state_.pose->gamma.y, state_.pose->gamma.z};
    double resid2_new = 0.0;
    if (p_ > 0) {
        Coords xs, ms;
        extract_matched(x_, mu_, state_.lambda, xs, ms);
        resid2_new = kernels::active().sum_sq_transformed_diff(xs.x(), xs.y(), xs.z(), xs.size(),
                                                               r9, tvec, ms.x(), ms.y(), ms.z());
    }
    const double log_alpha = -(state_.tau / 2.0) * (resid2_new - resid2_) +
                             haar_log_density(prop_angles) - haar_log_density(cur);

    bool accept = log_alpha >= 0.0;
    if (!accept) accept = std::log(rng_.uniform01()) < log_alpha;
    if (accept) {
        state_.pose->angles = prop_angles;
        refresh_pose_cache();
        ++angle_stats_.accepted;
    }
    return accept;
}

bool ConfigChain::mh_lambda_step() {
    ++lambda_stats_.proposed;
    const LambdaProposal prop = propose_lambda(state_.lambda, prop_, rng_);
    const std::int32_t cur = state_.lambda.assign[prop.row];
    if (prop.target == cur) {
        ++lambda_stats_.accepted;
        return true;
    }
    // the g-weight ratio on the transformed X is the exact posterior ratio here
    const Vec3 xt = x_transformed_.at(prop.row);
    const Vec3 mu_new = prop.target == kUnmatched ? Vec3{} : mu_.at(std::size_t(prop.target));
    const Vec3 mu_old = cur == kUnmatched ? Vec3{} : mu_.at(std::size_t(cur));
    const double g_new = log_g_weight(xt, prop.target == kUnmatched ? nullptr : &mu_new,
                                      state_.tau, state_.lambda.n_targets, cfg_);
    const double g_old = log_g_weight(xt, cur == kUnmatched ? nullptr : &mu_old, state_.tau,
                                      state_.lambda.n_targets, cfg_);
    const double log_alpha = g_new - g_old + prop.log_q_ratio;

    bool accept = log_alpha >= 0.0;
    if (!accept) accept = std::log(rng_.uniform01()) < log_alpha;
    if (accept) {
        // incremental residual update instead of a full refresh
        const Vec3 d_old = cur == kUnmatched ? Vec3{} : xt - mu_old;
        const Vec3 d_new = prop.target == kUnmatched ? Vec3{} : xt - mu_new;
        resid2_ += (prop.target == kUnmatched ? 0.0 : d_new.norm2()) -
                   (cur == kUnmatched ? 0.0 : d_old.norm2());
        p_ += (prop.target != kUnmatched) - (cur != kUnmatched);
        state_.lambda.assign[prop.row] = prop.target;
        ++lambda_stats_.accepted;
    }
    return accept;
}

double ConfigChain::log_posterior_value() const {
    return log_posterior(state_, x_, mu_, cfg_, ModelKind::configuration);
}

ChainTrace ConfigChain::run(const ChainOptions& opts, const GroundTruth* truth) {
    if (opts.n_iter < 1) throw Error("run_chain_config: n_iter must be >= 1");
    ChainTrace trace;
    trace.smm = SummedMatchMatrix(state_.lambda.rows(), state_.lambda.n_targets);
    for (std::int64_t it = 1; it <= opts.n_iter; ++it) {
        // fixed scan: tau, gamma, angles, lambda
        update_tau();
        update_gamma();
        mh_angles_step();
        for (int k = 0; k < prop_.lambda_updates_per_iter; ++k) mh_lambda_step();
        if (it > opts.burn_in) {
            trace.smm.accumulate(state_.lambda);
            if ((it - opts.burn_in) % opts.thin == 0) {
                trace.iteration.push_back(it);
                trace.tau.push_back(state_.tau);
                trace.p.push_back(p_);
                trace.log_post.push_back(log_posterior_value());
                trace.pose.push_back(*state_.pose);
            }
        }
        if (opts.check_every > 0 && it % opts.check_every == 0) {
            trace.lambda_checkpoints.emplace_back(it, state_.lambda);
            if (truth)
                trace.correct_counts.emplace_back(it, correct_match_count(state_.lambda, *truth));
        }
    }
    trace.lambda_moves = lambda_stats_;
    trace.angle_moves = angle_stats_;
    trace.final_lambda = state_.lambda;
    trace.final_tau = state_.tau;
    trace.final_pose = state_.pose;
    return trace;
}

ChainTrace run_chain_config(const PointSet& x, const PointSet& mu, const ModelConfig& cfg,
                            const ProposalConfig& prop, const AngleProposalConfig& angle_prop,
                            const ChainOptions& opts, const MatchMatrix& init_lambda,
                            const Pose& init_pose, Rng rng, const GroundTruth* truth) {
    ConfigChain chain(x, mu, cfg, prop, angle_prop, init_lambda, init_pose, rng);
    return chain.run(opts, truth);
}

}  // namespace pointmatch
