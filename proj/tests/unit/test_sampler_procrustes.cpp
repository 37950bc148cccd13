// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>

#include "pointmatch/sampler_procrustes.hpp"
#include "test_support.hpp"

using namespace pointmatch;
using testsupport::kPi;

namespace {

// brute-force target over all match matrices at fixed tau
std::map<std::vector<std::int32_t>, double> enumerate_posterior(const Coords& x, const Coords& mu,
                                                                double tau,
                                                                const ModelConfig& cfg) {
    std::map<std::vector<std::int32_t>, double> logp;
    testsupport::for_each_lambda(x.size(), std::int32_t(mu.size()), [&](const MatchMatrix& mm) {
        logp[mm.assign] =
            log_lik_procrustes(x, mu, mm, tau, cfg) + log_prior_lambda(mm, cfg);
    });
    std::vector<double> vals;
    for (const auto& [_, v] : logp) vals.push_back(v);
    const double z = testsupport::log_sum_exp(vals);
    for (auto& [_, v] : logp) v = std::exp(v - z);
    return logp;
}

}  // namespace

TEST_SUITE("sampler_procrustes") {

TEST_CASE("gibbs_tau: full-conditional parameters via Monte Carlo") {
    ModelConfig cfg;
    cfg.alpha0 = 1.0;
    cfg.beta0 = 36.0;
    Rng rng(2);

    // p = 10 (Q = 24), d^2 = 10: Gamma(13, 41)
    const int n = 100000;
    std::vector<double> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(gibbs_tau_from_residual(10, 10.0, cfg, rng));
    const double shape = 13.0, rate = 41.0;
    const double se_mean = std::sqrt(shape / (rate * rate) / n);
    CHECK(std::abs(testsupport::mean_of(draws) - shape / rate) < 3 * se_mean);

    // d^2 = 0 keeps the prior rate
    draws.clear();
    for (int i = 0; i < n; ++i) draws.push_back(gibbs_tau_from_residual(10, 0.0, cfg, rng));
    CHECK(std::abs(testsupport::mean_of(draws) - 13.0 / 36.0) <
          3 * std::sqrt(13.0 / (36.0 * 36.0) / n));

    // p <= 1 falls back to the prior
    draws.clear();
    for (int i = 0; i < n; ++i) draws.push_back(gibbs_tau_from_residual(1, 0.0, cfg, rng));
    CHECK(std::abs(testsupport::mean_of(draws) - 1.0 / 36.0) <
          3 * std::sqrt(1.0 / (36.0 * 36.0) / n));
}

TEST_CASE("propose_lambda: q-ratio transcription") {
    ProposalConfig prop;
    prop.p_reject = 0.2;
    Rng rng(3);
    MatchMatrix mm = MatchMatrix::all_unmatched(4, 63);
    mm.assign = {5, kUnmatched, 10, 20};

    int seen_mu = 0, seen_um = 0, seen_mm = 0;
    for (int i = 0; i < 20000; ++i) {
        const LambdaProposal p = propose_lambda(mm, prop, rng);
        const bool was_matched = mm.assign[p.row] != kUnmatched;
        if (!was_matched) {
            CHECK(p.target != kUnmatched);
            CHECK(p.log_q_ratio == doctest::Approx(std::log(0.2 * 63)).epsilon(1e-14));
            ++seen_um;
        } else if (p.target == kUnmatched) {
            CHECK(p.log_q_ratio == doctest::Approx(-std::log(0.2 * 63)).epsilon(1e-14));
            ++seen_mu;
        } else {
            CHECK(p.log_q_ratio == 0.0);
            CHECK(p.target != mm.assign[p.row]);
            ++seen_mm;
        }
    }
    CHECK(seen_mu > 0);
    CHECK(seen_um > 0);
    CHECK(seen_mm > 0);

    // p_reject = 1/N makes every q-ratio vanish
    prop.p_reject = 1.0 / 63.0;
    for (int i = 0; i < 5000; ++i)
        CHECK(propose_lambda(mm, prop, rng).log_q_ratio == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("propose_lambda: empirical kernel frequencies match the three-case law") {
    ProposalConfig prop;
    prop.p_reject = 0.3;
    Rng rng(5);
    const std::int32_t n_targets = 4;
    MatchMatrix mm = MatchMatrix::all_unmatched(2, n_targets);
    mm.assign = {1, kUnmatched};

    const int draws = 1000000;
    std::map<std::pair<std::size_t, std::int32_t>, std::int64_t> counts;
    for (int i = 0; i < draws; ++i) {
        const LambdaProposal p = propose_lambda(mm, prop, rng);
        ++counts[{p.row, p.target}];
    }
    auto freq = [&](std::size_t row, std::int32_t target) {
        return double(counts[{row, target}]) / draws;
    };
    auto near3 = [&](double got, double want) {
        const double se = std::sqrt(want * (1 - want) / draws);
        CHECK(std::abs(got - want) < 3.5 * se);
    };
    // row 0 is matched to 1: unmatch w.p. .5*.3, each other target w.p. .5*.7/3
    near3(freq(0, kUnmatched), 0.5 * 0.3);
    near3(freq(0, 0), 0.5 * 0.7 / 3);
    near3(freq(0, 2), 0.5 * 0.7 / 3);
    near3(freq(0, 3), 0.5 * 0.7 / 3);
    CHECK(counts.count({0, 1}) == 0);
    // row 1 is unmatched: uniform over the 4 targets
    for (std::int32_t t = 0; t < n_targets; ++t) near3(freq(1, t), 0.5 / 4);
}

TEST_CASE("exact chain at fixed tau matches brute-force enumeration (M=2, N=2)") {
    Rng rng(931);
    const Coords x_raw = testsupport::random_coords(rng, 2, 2.0);
    const Coords mu_raw = testsupport::random_coords(rng, 2, 2.0);
    ModelConfig cfg;
    cfg.psi = 0.25;
    cfg.volume_A = 30.0;
    const double tau = 1.3;

    // enumeration uses centered data, mirroring the chain's internal frame
    const Coords x = center(x_raw);
    const Coords mu = center(mu_raw);
    const auto exact = enumerate_posterior(x, mu, tau, cfg);

    ProposalConfig prop;
    prop.p_reject = 0.25;
    ProcrustesChain chain(testsupport::to_pointset(x_raw, "x"),
                          testsupport::to_pointset(mu_raw, "m"), cfg, prop,
                          MatchMatrix::all_unmatched(2, 2), Rng(77));
    chain.set_tau(tau);

    const int iters = 400000;
    std::map<std::vector<std::int32_t>, std::int64_t> counts;
    std::map<std::vector<std::int32_t>, std::int64_t> thinned;
    for (int i = 0; i < iters; ++i) {
        chain.mh_lambda_step();
        ++counts[chain.lambda().assign];
        if (i % 100 == 0) ++thinned[chain.lambda().assign];
    }

    for (const auto& [assign, pr] : exact) {
        const double emp = counts.count(assign) ? double(counts.at(assign)) / iters : 0.0;
        CHECK(std::abs(emp - pr) < 0.015);
    }

    // chi-square on near-independent thinned draws, alpha = 0.001, df = 8
    std::vector<std::int64_t> obs;
    std::vector<double> probs;
    std::int64_t tot = 0;
    for (const auto& [assign, pr] : exact) {
        obs.push_back(thinned.count(assign) ? thinned.at(assign) : 0);
        probs.push_back(pr);
        tot += obs.back();
    }
    CHECK(testsupport::chi2_statistic(obs, probs, tot) < 26.124);
}

TEST_CASE("mh_lambda_step: self-proposal in the N=1 kernel is accepted unchanged") {
    Coords x, mu;
    x.push_back({0, 0, 0});
    x.push_back({1, 0, 0});
    mu.push_back({0.5, 0, 0});
    ModelConfig cfg;
    cfg.volume_A = 4.0;
    ProposalConfig prop;
    prop.p_reject = 0.0;  // matched rows can only self-propose
    MatchMatrix init = MatchMatrix::all_unmatched(2, 1);
    init.assign = {0, 0};
    ProcrustesChain chain(testsupport::to_pointset(x, "x"), testsupport::to_pointset(mu, "m"), cfg,
                          prop, init, Rng(4));
    for (int i = 0; i < 200; ++i) {
        CHECK(chain.mh_lambda_step());
        CHECK(chain.lambda().assign == std::vector<std::int32_t>{0, 0});
    }
    CHECK(chain.lambda_stats().rate() == 1.0);
}

TEST_CASE("registration after accepted moves satisfies Procrustes optimality") {
    Rng rng(6);
    const Coords x = testsupport::random_coords(rng, 6, 3.0);
    const Coords mu = testsupport::random_coords(rng, 7, 3.0);
    ModelConfig cfg;
    cfg.volume_A = 200.0;
    ProposalConfig prop;
    ProcrustesChain chain(testsupport::to_pointset(x, "x"), testsupport::to_pointset(mu, "m"), cfg,
                          prop, MatchMatrix::all_unmatched(6, 7), Rng(8));
    Rng check_rng(9);
    for (int i = 0; i < 300; ++i) {
        chain.update_tau();
        chain.mh_lambda_step();
        CHECK(chain.tau() > 0.0);
        if (chain.matched_count() >= 2) {
            Coords xs, ms;
            extract_matched(chain.x(), chain.mu(), chain.lambda(), xs, ms);
            const Coords xs_c = center(xs), ms_c = center(ms);
            for (int r = 0; r < 20; ++r) {
                const Mat3 rot = euler_to_matrix(EulerAngles::normalized(
                    check_rng.uniform(-kPi, kPi), check_rng.uniform(-kPi / 2, kPi / 2),
                    check_rng.uniform(-kPi, kPi)));
                const double resid = testsupport::residual_at_rotation(xs_c, ms_c, rot);
                CHECK(std::sqrt(chain.residual2()) <= resid + 1e-10);
            }
        }
    }
}

TEST_CASE("run_chain: reproducibility and trace shape") {
    Rng rng(12);
    const auto x = testsupport::to_pointset(testsupport::random_coords(rng, 5, 3.0), "x");
    const auto mu = testsupport::to_pointset(testsupport::random_coords(rng, 6, 3.0), "m");
    ModelConfig cfg;
    cfg.volume_A = 100.0;
    ProposalConfig prop;
    ChainOptions opts;
    opts.n_iter = 4000;
    opts.burn_in = 1000;
    opts.thin = 3;
    const MatchMatrix init = MatchMatrix::all_unmatched(5, 6);

    const ChainTrace t1 = run_chain(x, mu, cfg, prop, opts, init, Rng(99));
    const ChainTrace t2 = run_chain(x, mu, cfg, prop, opts, init, Rng(99));
    REQUIRE(t1.tau.size() == t2.tau.size());
    CHECK(t1.tau.size() == std::size_t(3000 / 3));
    for (std::size_t i = 0; i < t1.tau.size(); ++i) {
        CHECK(t1.tau[i] == t2.tau[i]);  // bit-identical
        CHECK(t1.log_post[i] == t2.log_post[i]);
        CHECK(t1.tau[i] > 0.0);
    }
    CHECK(t1.final_lambda == t2.final_lambda);
    CHECK(t1.smm.total == 3000);
    for (const auto& row : t1.smm.counts) {
        std::int64_t s = 0;
        for (auto c : row) s += c;
        CHECK(s == t1.smm.total);
    }

    // a different seed decorrelates immediately
    const ChainTrace t3 = run_chain(x, mu, cfg, prop, opts, init, Rng(100));
    bool any_diff = false;
    for (std::size_t i = 0; i < t1.tau.size(); ++i) any_diff |= (t1.tau[i] != t3.tau[i]);
    CHECK(any_diff);
}

TEST_CASE("fixed-lambda tau trace matches the conjugate mean") {
    Rng rng(13);
    const Coords x = testsupport::random_coords(rng, 6, 2.0);
    Coords mu = x;  // exact congruence keeps d^2 at zero
    ModelConfig cfg;
    cfg.alpha0 = 3.0;
    cfg.beta0 = 2.0;
    cfg.volume_A = 10.0;
    MatchMatrix mm = MatchMatrix::all_unmatched(6, 6);
    for (int i = 0; i < 6; ++i) mm.assign[std::size_t(i)] = std::int32_t(i);
    ProcrustesChain chain(testsupport::to_pointset(x, "x"), testsupport::to_pointset(mu, "m"), cfg,
                          ProposalConfig{}, mm, Rng(14));
    const int n = 100000;
    std::vector<double> taus;
    for (int i = 0; i < n; ++i) {
        chain.update_tau();
        taus.push_back(chain.tau());
    }
    const double shape = cfg.alpha0 + q_dim(6) / 2.0;  // d^2 = 0: rate stays beta0
    const double want = shape / cfg.beta0;
    CHECK(testsupport::mean_of(taus) ==
          doctest::Approx(want).epsilon(4.0 / std::sqrt(double(n))));
}

TEST_CASE("invalid init dimensions are rejected") {
    Rng rng(1);
    const auto x = testsupport::to_pointset(testsupport::random_coords(rng, 3, 1.0), "x");
    const auto mu = testsupport::to_pointset(testsupport::random_coords(rng, 3, 1.0), "m");
    ModelConfig cfg;
    cfg.volume_A = 1.0;
    CHECK_THROWS_AS(ProcrustesChain(x, mu, cfg, ProposalConfig{},
                                    MatchMatrix::all_unmatched(2, 3), Rng(0)),
                    Error);
    MatchMatrix bad = MatchMatrix::all_unmatched(3, 3);
    bad.assign[0] = 7;
    CHECK_THROWS_AS(ProcrustesChain(x, mu, cfg, ProposalConfig{}, bad, Rng(0)), Error);
}

}  // TEST_SUITE
