// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pointmatch/experiments.hpp"
#include "test_support.hpp"

using namespace pointmatch;
using testsupport::kPi;

TEST_SUITE("experiments") {

TEST_CASE("generate_sim_instance: separation, exact rows at s=0, truth bookkeeping") {
    SimConfig sc;
    sc.L = 10;
    sc.d_min = 2;
    sc.M = 20;
    sc.N = 24;
    sc.n_ones = 12;
    sc.s = 0.0;
    Rng rng(3);
    const SimInstance inst = generate_sim_instance(sc, rng);

    REQUIRE(inst.mu.size() == 24);
    REQUIRE(inst.x.size() == 20);
    for (std::size_t i = 0; i < inst.mu.size(); ++i)
        for (std::size_t j = i + 1; j < inst.mu.size(); ++j)
            CHECK((inst.mu.point(i) - inst.mu.point(j)).norm() >= sc.d_min);
    for (int i = 0; i < sc.n_ones; ++i)
        CHECK((inst.x.point(std::size_t(i)) - inst.mu.point(std::size_t(i))).norm() == 0.0);
    CHECK(inst.truth.pairs.size() == 12);
    CHECK(inst.truth.unmatched.size() == 8);
    for (std::size_t i = 0; i < inst.x.size(); ++i) {
        const Vec3 p = inst.x.point(i);
        CHECK(std::abs(p.x) <= sc.L);
        CHECK(std::abs(p.y) <= sc.L);
        CHECK(std::abs(p.z) <= sc.L);
    }
}

TEST_CASE("generate_sim_instance: perturbation moments across replicates") {
    SimConfig sc;
    sc.L = 10;
    sc.d_min = 2;
    sc.M = 4;
    sc.N = 6;
    sc.n_ones = 3;
    sc.s = 0.4;
    Rng rng(5);
    const SimInstance base = generate_sim_instance(sc, rng);
    const int reps = 4000;
    std::vector<double> dx;
    for (int k = 0; k < reps; ++k) {
        Rng r = rng.derive(std::uint64_t(k) + 10);
        const SimInstance inst = resample_x(sc, base.mu, r);
        dx.push_back(inst.x.point(0).x - base.mu.point(0).x);
    }
    CHECK(std::abs(testsupport::mean_of(dx)) < 4.0 * sc.s / std::sqrt(double(reps)));
    CHECK(std::sqrt(testsupport::variance_of(dx)) == doctest::Approx(sc.s).epsilon(0.08));
}

TEST_CASE("generate_sim_instance: infeasible packing throws") {
    SimConfig sc;
    sc.L = 1.0;
    sc.d_min = 0.999;
    sc.M = 2;
    sc.N = 200;
    sc.n_ones = 1;
    sc.s = 0.1;
    sc.n_iter = 1;
    sc.K = 1;
    Rng rng(7);
    CHECK_THROWS_AS(generate_sim_instance(sc, rng), Error);
}

TEST_CASE("correct_match_count: examples and the naive-loop oracle") {
    GroundTruth truth;
    truth.pairs = {{0, 3}, {1, 1}, {2, 0}};
    truth.unmatched = {3};
    MatchMatrix mm = MatchMatrix::all_unmatched(4, 5);
    CHECK(correct_match_count(mm, truth) == 0);
    mm.assign = {3, 1, 0, kUnmatched};
    CHECK(correct_match_count(mm, truth) == 3);

    Rng rng(9);
    for (int rep = 0; rep < 200; ++rep) {
        for (auto& a : mm.assign) {
            const auto t = rng.uniform_int(6);
            a = t == 5 ? kUnmatched : std::int32_t(t);
        }
        int naive = 0;
        for (const auto& [xi, mi] : truth.pairs)
            for (std::size_t r = 0; r < mm.rows(); ++r)
                if (r == xi && mm.assign[r] == std::int32_t(mi)) ++naive;
        CHECK(correct_match_count(mm, truth) == naive);
    }
}

TEST_CASE("convergence_monitor: first hit or none") {
    std::vector<std::pair<std::int64_t, int>> counts = {
        {1000, 2}, {2000, 7}, {3000, 10}, {4000, 9}, {5000, 11}};
    CHECK(convergence_monitor(counts, 10) == 3000);
    CHECK(convergence_monitor(counts, 0) == 1000);
    CHECK(convergence_monitor(counts, 12) == -1);
    CHECK(convergence_monitor({}, 1) == -1);
}

TEST_CASE("convergence_monitor agrees with a post-hoc replay of the stored trace") {
    SimConfig sc;
    sc.L = 8;
    sc.d_min = 2;
    sc.M = 8;
    sc.N = 10;
    sc.n_ones = 5;
    sc.s = 0.1;
    Rng rng(17);
    const SimInstance inst = generate_sim_instance(sc, rng);
    ModelConfig cfg;
    cfg.alpha0 = 0.1;
    cfg.beta0 = 0.1;
    cfg.volume_A = 8 * sc.L * sc.L * sc.L;
    ChainOptions opts;
    opts.n_iter = 5000;
    opts.thin = 5000;
    opts.check_every = 250;
    const ChainTrace trace =
        run_chain(inst.x, inst.mu, cfg, ProposalConfig{}, opts,
                  MatchMatrix::all_unmatched(8, 10), Rng(18), &inst.truth);

    // replay: recompute the counts from the stored checkpoints
    REQUIRE(trace.lambda_checkpoints.size() == trace.correct_counts.size());
    std::vector<std::pair<std::int64_t, int>> replayed;
    for (const auto& [it, mm] : trace.lambda_checkpoints)
        replayed.emplace_back(it, correct_match_count(mm, inst.truth));
    CHECK(replayed == trace.correct_counts);
    for (int threshold : {0, 1, 3, 5, 6})
        CHECK(convergence_monitor(replayed, threshold) ==
              convergence_monitor(trace.correct_counts, threshold));
}

TEST_CASE("match_probabilities and threshold_match_matrix") {
    SummedMatchMatrix smm(2, 2);
    MatchMatrix a = MatchMatrix::all_unmatched(2, 2);
    a.assign = {0, kUnmatched};
    smm.accumulate(a);
    auto probs = match_probabilities(smm);
    CHECK(probs[0][0] == 1.0);
    CHECK(probs[1][2] == 1.0);

    MatchMatrix b = a;
    b.assign[0] = 1;
    smm.accumulate(b);
    probs = match_probabilities(smm);
    CHECK(probs[0][0] == doctest::Approx(0.5));
    CHECK(probs[0][1] == doctest::Approx(0.5));
    for (const auto& row : probs) {
        double s = 0;
        for (double v : row) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    // argmax with ties to the lowest column; scaling invariance
    SummedMatchMatrix t(1, 2);
    t.counts[0] = {10, 5, 85};
    t.total = 100;
    CHECK(threshold_match_matrix(t).assign[0] == kUnmatched);
    t.counts[0] = {5, 5, 5};
    t.total = 15;
    CHECK(threshold_match_matrix(t).assign[0] == 0);
    t.counts[0] = {35, 70, 35};
    t.total = 140;
    const auto th1 = threshold_match_matrix(t);
    for (auto& c : t.counts[0]) c *= 7;
    t.total *= 7;
    CHECK(threshold_match_matrix(t) == th1);

    SummedMatchMatrix empty(1, 2);
    CHECK_THROWS_AS(match_probabilities(empty), Error);
    CHECK_THROWS_AS(threshold_match_matrix(empty), Error);
}

TEST_CASE("summed match matrix rows always sum to the total") {
    Rng rng(11);
    SummedMatchMatrix smm(5, 7);
    MatchMatrix mm = MatchMatrix::all_unmatched(5, 7);
    for (int i = 0; i < 500; ++i) {
        for (auto& a : mm.assign) {
            const auto t = rng.uniform_int(8);
            a = t == 7 ? kUnmatched : std::int32_t(t);
        }
        smm.accumulate(mm);
        for (const auto& row : smm.counts) {
            std::int64_t s = 0;
            for (auto c : row) s += c;
            CHECK(s == smm.total);
        }
    }
}

TEST_CASE("simulation_study: shape, K=1 flag, and a tight-noise sanity run") {
    SimConfig sc;
    sc.L = 8;
    sc.d_min = 2;
    sc.M = 6;
    sc.N = 8;
    sc.n_ones = 4;
    sc.s = 0.05;
    sc.n_iter = 2000;
    sc.K = 3;
    ModelConfig cfg;
    cfg.alpha0 = 0.1;  // vague conjugate prior lets tau follow the data
    cfg.beta0 = 0.1;
    cfg.psi = 0.2;
    cfg.volume_A = 8 * sc.L * sc.L * sc.L;

    for (ModelKind kind : {ModelKind::procrustes, ModelKind::configuration}) {
        const auto rows = simulation_study(sc, kind, cfg, ProposalConfig{}, AngleProposalConfig{},
                                           Rng(12));
        REQUIRE(rows.size() == std::size_t(sc.M));
        double matched_mean = 0.0;
        for (int i = 0; i < sc.n_ones; ++i) {
            CHECK(rows[std::size_t(i)].true_match);
            matched_mean += rows[std::size_t(i)].mean_proportion;
        }
        matched_mean /= sc.n_ones;
        CHECK(matched_mean > 0.9);
        CHECK(rows[5].true_match == false);
    }

    sc.K = 1;
    const auto rows = simulation_study(sc, ModelKind::procrustes, ModelConfig{cfg}, ProposalConfig{},
                                       AngleProposalConfig{}, Rng(13));
    for (const auto& r : rows) {
        CHECK(!r.variance_defined);
        CHECK(r.variance == 0.0);
    }
}

TEST_CASE("laplace_diagnostic: p=0 equality, ranking, and seed stability") {
    Rng rng(21);
    SimConfig sc;
    sc.L = 3;
    sc.d_min = 1.2;
    sc.M = 8;
    sc.N = 10;
    sc.n_ones = 6;
    sc.s = 0.1;
    const SimInstance inst = generate_sim_instance(sc, rng);
    // center both sets so the pose posterior overlaps the tight gamma prior
    const Coords x = center(inst.x.coords);
    const Coords mu = center(inst.mu.coords);
    ModelConfig cfg;
    cfg.psi = 0.2;
    cfg.volume_A = 2000.0;
    cfg.sigma_gamma = 1.0;
    const double tau = 8.0;

    std::vector<MatchMatrix> cands;
    for (int size = 0; size <= 6; ++size) {
        MatchMatrix mm = MatchMatrix::all_unmatched(8, 10);
        for (int i = 0; i < size; ++i) mm.assign[std::size_t(i)] = std::int32_t(i);
        cands.push_back(mm);
    }
    // corrupted candidates at several sizes anchor the ranking
    for (int size : {2, 4, 6}) {
        MatchMatrix mm = MatchMatrix::all_unmatched(8, 10);
        for (int i = 0; i < size; ++i)
            mm.assign[std::size_t(i)] = std::int32_t((i + 4) % 10);  // systematically wrong
        cands.push_back(mm);
    }
    MatchMatrix bad = cands[6];
    bad.assign[0] = 9;  // full truth match with one target far off
    cands.push_back(bad);

    Rng mc1(31);
    const auto res = laplace_diagnostic(x, mu, cands, tau, cfg, 50000, mc1);
    REQUIRE(res.size() == cands.size());

    // p = 0: both reduce to the same uniform-only expression
    CHECK(res[0].log_pi_c == doctest::Approx(res[0].log_pi_p).epsilon(1e-12));

    // a strict sub-match of the perfect match ranks below it, both ways
    for (int size = 0; size <= 4; ++size) {
        CHECK(res[6].log_pi_c > res[std::size_t(size)].log_pi_c);
        CHECK(res[6].log_pi_p > res[std::size_t(size)].log_pi_p);
    }
    // every corrupted candidate loses to the clean full match
    for (std::size_t i = 7; i < res.size(); ++i) {
        CHECK(res[i].log_pi_c < res[6].log_pi_c);
        CHECK(res[i].log_pi_p < res[6].log_pi_p);
    }

    // rank agreement between the two posteriors
    std::vector<double> pc, pp;
    for (const auto& r : res) {
        pc.push_back(r.log_pi_c);
        pp.push_back(r.log_pi_p);
    }
    CHECK(testsupport::spearman_rank_corr(pc, pp) >= 0.8);

    // near a flat likelihood the importance sampler is healthy: repeated
    // estimation agrees within a few reported standard errors
    const double tau_flat = 0.05;
    Rng mc2(32), mc3(33);
    const auto f1 = laplace_diagnostic(x, mu, cands, tau_flat, cfg, 50000, mc2);
    const auto f2 = laplace_diagnostic(x, mu, cands, tau_flat, cfg, 50000, mc3);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        const double tol = 6.0 * (f1[i].mc_se + f2[i].mc_se) + 1e-9;
        CHECK(std::abs(f1[i].log_pi_c - f2[i].log_pi_c) < tol);
        CHECK(f1[i].log_pi_p == doctest::Approx(f2[i].log_pi_p).epsilon(1e-13));
    }

    CHECK_THROWS_AS(laplace_diagnostic(x, mu, cands, tau, cfg, 10, mc1), Error);

    // degenerate Monte Carlo: coordinates large enough that every weighted
    // likelihood underflows to -inf
    Coords far_x = x, far_mu = mu;
    far_x.set(0, {1e160, 0, 0});
    far_mu.set(0, {-1e160, 0, 0});
    std::vector<MatchMatrix> one;
    MatchMatrix mm0 = MatchMatrix::all_unmatched(8, 10);
    mm0.assign[0] = 0;
    mm0.assign[1] = 1;
    one.push_back(mm0);
    Rng mc4(44);
    CHECK_THROWS_AS(laplace_diagnostic(far_x, far_mu, one, tau, cfg, 2000, mc4), Error);
}

}  // TEST_SUITE
