// SPDX-License-Identifier: Apache-2.0
//
// fit / simulate / laplace / validate drivers: everything between a parsed
// config and the output files.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "pointmatch/io.hpp"

namespace pointmatch::io {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string model_name(ModelKind k) {
    return k == ModelKind::procrustes ? "procrustes" : "configuration";
}

MatchMatrix load_init_lambda(const RunConfig& rc, const PointSet& x, const PointSet& mu,
                             Rng& rng) {
    switch (rc.init_lambda) {
        case InitLambdaKind::all_unmatched:
            return MatchMatrix::all_unmatched(x.size(), std::int32_t(mu.size()));
        case InitLambdaKind::random: {
            MatchMatrix mm = MatchMatrix::all_unmatched(x.size(), std::int32_t(mu.size()));
            for (auto& a : mm.assign) {
                const auto t = rng.uniform_int(mu.size() + 1);
                a = t == mu.size() ? kUnmatched : std::int32_t(t);
            }
            return mm;
        }
        case InitLambdaKind::from_csv: {
            const GroundTruth gt = read_truth(rc.init_lambda_csv, x, mu);
            MatchMatrix mm = MatchMatrix::all_unmatched(x.size(), std::int32_t(mu.size()));
            for (const auto& [xi, mi] : gt.pairs) mm.assign[xi] = std::int32_t(mi);
            return mm;
        }
    }
    throw Error("unreachable");
}

void write_trace_csv(const std::filesystem::path& path, const ChainTrace& trace, bool with_pose) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write: " + path.string());
    out << "iteration,tau,p,log_posterior";
    if (with_pose) out << ",theta12,theta13,theta23,gamma_x,gamma_y,gamma_z";
    out << '\n';
    for (std::size_t r = 0; r < trace.iteration.size(); ++r) {
        out << trace.iteration[r] << ',' << fmt17(trace.tau[r]) << ',' << trace.p[r] << ','
            << fmt17(trace.log_post[r]);
        if (with_pose) {
            const Pose& ps = trace.pose[r];
            out << ',' << fmt17(ps.angles.theta12) << ',' << fmt17(ps.angles.theta13) << ','
                << fmt17(ps.angles.theta23) << ',' << fmt17(ps.gamma.x) << ','
                << fmt17(ps.gamma.y) << ',' << fmt17(ps.gamma.z);
        }
        out << '\n';
    }
}

void write_match_probs_csv(const std::filesystem::path& path, const SummedMatchMatrix& smm,
                           const PointSet& x, const PointSet& mu) {
    const auto probs = match_probabilities(smm);
    std::ofstream out(path);
    if (!out) throw Error("cannot write: " + path.string());
    out << "x_id";
    for (const auto& id : mu.ids) out << ',' << id;
    out << ",unmatched\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << x.ids[i];
        for (double pr : probs[i]) out << ',' << fmt17(pr);
        out << '\n';
    }
}

void write_threshold_csv(const std::filesystem::path& path, const MatchMatrix& mm,
                         const PointSet& x, const PointSet& mu) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write: " + path.string());
    out << "x_id,mu_id\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << x.ids[i] << ','
            << (mm.assign[i] == kUnmatched ? std::string("unmatched")
                                           : mu.ids[std::size_t(mm.assign[i])])
            << '\n';
    }
}

json move_stats_json(const MoveStats& ms) {
    return json{{"proposed", ms.proposed}, {"accepted", ms.accepted}, {"rate", ms.rate()}};
}

}  // namespace

int run_fit(const std::filesystem::path& config_path) {
    RunConfig rc = parse_run_config(config_path);
    const PointSet x = read_pointset(rc.x_csv);
    const PointSet mu = read_pointset(rc.mu_csv);
    std::optional<GroundTruth> truth;
    if (rc.truth_csv) truth = read_truth(*rc.truth_csv, x, mu);
    if (rc.volume_from_data) rc.model_config.volume_A = volume_bounding_box(x, mu);
    rc.model_config.validate();

    std::filesystem::create_directories(rc.output_dir);

    Rng master(rc.seed);
    Rng init_rng = master.derive(1);
    const MatchMatrix init = load_init_lambda(rc, x, mu, init_rng);

    ChainOptions opts;
    opts.n_iter = rc.n_iter;
    opts.burn_in = rc.burn_in;
    opts.thin = rc.thin;
    opts.check_every = rc.check_every;

    ChainTrace trace;
    InitPhaseResult init_res;
    bool had_init_phase = false;
    if (rc.model == ModelKind::procrustes) {
        ProcrustesChain chain(x, mu, rc.model_config, rc.proposal, init, master.derive(2));
        if (rc.init_jumps) {
            init_res = initialization_phase(chain, *rc.init_jumps, rc.check_every,
                                            truth ? &*truth : nullptr);
            had_init_phase = true;
        }
        trace = chain.run(opts, truth ? &*truth : nullptr);
    } else {
        trace = run_chain_config(x, mu, rc.model_config, rc.proposal, rc.angle_proposal, opts,
                                 init, Pose{}, master.derive(2), truth ? &*truth : nullptr);
    }

    write_trace_csv(rc.output_dir / "trace.csv", trace, rc.model == ModelKind::configuration);
    write_match_probs_csv(rc.output_dir / "match_probs.csv", trace.smm, x, mu);
    const MatchMatrix thr = threshold_match_matrix(trace.smm);
    write_threshold_csv(rc.output_dir / "threshold_match.csv", thr, x, mu);

    json summary;
    summary["model"] = model_name(rc.model);
    summary["seed"] = rc.seed;
    summary["n_iter"] = rc.n_iter;
    summary["burn_in"] = rc.burn_in;
    summary["thin"] = rc.thin;
    summary["volume_A"] = rc.model_config.volume_A;
    summary["acceptance"]["lambda"] = move_stats_json(trace.lambda_moves);
    if (rc.model == ModelKind::configuration)
        summary["acceptance"]["angles"] = move_stats_json(trace.angle_moves);
    if (had_init_phase) {
        summary["acceptance"]["init_nearness"] = move_stats_json(init_res.nearness_moves);
        summary["acceptance"]["init_rotation"] = move_stats_json(init_res.rotation_moves);
        summary["acceptance"]["init_translation"] = move_stats_json(init_res.translation_moves);
        summary["acceptance"]["init_flip"] = move_stats_json(init_res.flip_moves);
    }
    double tau_mean = 0.0;
    for (double t : trace.tau) tau_mean += t;
    if (!trace.tau.empty()) tau_mean /= double(trace.tau.size());
    summary["tau_posterior_mean"] = tau_mean;
    summary["final_p"] = trace.final_lambda.matched_count();
    if (!trace.log_post.empty()) summary["final_log_posterior"] = trace.log_post.back();
    int unmatched_rows = 0;
    for (auto a : thr.assign) unmatched_rows += (a == kUnmatched);
    summary["threshold_unmatched_count"] = unmatched_rows;
    if (truth) {
        json traj = json::array();
        if (had_init_phase)
            for (const auto& [it, c] : init_res.correct_counts)
                traj.push_back(json::array({-(*rc.init_jumps).n_initialisation + it, c}));
        for (const auto& [it, c] : trace.correct_counts) traj.push_back(json::array({it, c}));
        summary["correct_match_trajectory"] = traj;
        if (rc.convergence_threshold) {
            const auto hit = convergence_monitor(trace.correct_counts, *rc.convergence_threshold);
            summary["convergence_iteration"] = hit < 0 ? json() : json(hit);
        }
    }
    std::ofstream sout(rc.output_dir / "summary.json");
    if (!sout) throw Error("cannot write summary.json");
    sout << summary.dump(2) << '\n';
    return 0;
}

int run_simulate(const std::filesystem::path& config_path) {
    SimOutputConfig sc = parse_sim_config(config_path);
    if (sc.volume_from_data) sc.model_config.volume_A = 8.0 * sc.sim.L * sc.sim.L * sc.sim.L;
    sc.model_config.validate();

    if (sc.output_csv.has_parent_path())
        std::filesystem::create_directories(sc.output_csv.parent_path());
    std::ofstream out(sc.output_csv);
    if (!out) throw Error("cannot write: " + sc.output_csv.string());
    out << "point_index,true_role,mean_proportion,variance,s,model_kind\n";

    const Rng master(sc.seed);
    for (std::size_t si = 0; si < sc.s_values.size(); ++si) {
        SimConfig sim = sc.sim;
        sim.s = sc.s_values[si];
        // both models see the same instance stream for a given s
        const Rng stream = master.derive(100 + si);
        for (ModelKind kind : sc.models) {
            const auto rows = simulation_study(sim, kind, sc.model_config, sc.proposal,
                                               sc.angle_proposal, stream);
            for (const auto& r : rows) {
                out << (r.point_index + 1) << ',' << (r.true_match ? "matched" : "unmatched")
                    << ',' << fmt17(r.mean_proportion) << ',' << fmt17(r.variance) << ','
                    << fmt17(sim.s) << ',' << model_name(kind) << '\n';
            }
        }
    }
    return 0;
}

int run_laplace(const std::filesystem::path& config_path) {
    const LaplaceRunConfig lc = parse_laplace_config(config_path);
    const PointSet x = read_pointset(lc.x_csv);
    const PointSet mu = read_pointset(lc.mu_csv);
    ModelConfig mc = lc.model_config;
    if (lc.volume_from_data) mc.volume_A = volume_bounding_box(x, mu);
    mc.validate();

    std::vector<MatchMatrix> lambdas;
    for (const auto& cand : lc.candidates) lambdas.push_back(resolve_candidate(cand, x, mu));

    Rng rng(lc.seed);
    const auto pairs = laplace_diagnostic(x.coords, mu.coords, lambdas, lc.tau, mc, lc.n_mc, rng);

    if (lc.output_csv.has_parent_path())
        std::filesystem::create_directories(lc.output_csv.parent_path());
    std::ofstream out(lc.output_csv);
    if (!out) throw Error("cannot write: " + lc.output_csv.string());
    out << "candidate,p,log_pi_c,log_pi_p,mc_se\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out << lc.candidates[i].name << ',' << lambdas[i].matched_count() << ','
            << fmt17(pairs[i].log_pi_c) << ',' << fmt17(pairs[i].log_pi_p) << ','
            << fmt17(pairs[i].mc_se) << '\n';
    }
    return 0;
}

int run_validate(const std::filesystem::path& config_path) {
    const json j = [&] {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file: " + config_path.string());
        json out;
        try {
            in >> out;
        } catch (const json::exception& e) {
            throw ConfigError(config_path.string() + ": " + e.what());
        }
        return out;
    }();

    if (j.contains("candidates")) {
        const LaplaceRunConfig lc = parse_laplace_config(config_path);
        const PointSet x = read_pointset(lc.x_csv);
        const PointSet mu = read_pointset(lc.mu_csv);
        for (const auto& cand : lc.candidates) resolve_candidate(cand, x, mu);
        std::cout << "laplace config OK: " << lc.candidates.size() << " candidates, X " << x.size()
                  << " points, mu " << mu.size() << " points\n";
    } else if (j.contains("s_values")) {
        const SimOutputConfig sc = parse_sim_config(config_path);
        std::cout << "sim config OK: " << sc.s_values.size() << " s values, "
                  << sc.models.size() << " model(s), K=" << sc.sim.K << "\n";
    } else {
        const RunConfig rc = parse_run_config(config_path);
        const PointSet x = read_pointset(rc.x_csv);
        const PointSet mu = read_pointset(rc.mu_csv);
        if (rc.truth_csv) read_truth(*rc.truth_csv, x, mu);
        if (rc.init_lambda == InitLambdaKind::from_csv) read_truth(rc.init_lambda_csv, x, mu);
        const double vol =
            rc.volume_from_data ? volume_bounding_box(x, mu) : rc.model_config.volume_A;
        std::cout << "run config OK: model " << model_name(rc.model) << ", X " << x.size()
                  << " points, mu " << mu.size() << " points, |A| = " << vol << "\n";
    }
    return 0;
}

std::string canonical_run_config(const RunConfig& rc) {
    json j;
    j["model"] = model_name(rc.model);
    j["x_csv"] = rc.x_csv.string();
    j["mu_csv"] = rc.mu_csv.string();
    j["truth_csv"] = rc.truth_csv ? json(rc.truth_csv->string()) : json();
    j["output_dir"] = rc.output_dir.string();
    j["seed"] = rc.seed;
    j["iterations"] = {{"n_iter", rc.n_iter},
                       {"burn_in", rc.burn_in},
                       {"thin", rc.thin},
                       {"check_every", rc.check_every}};
    if (rc.convergence_threshold)
        j["iterations"]["convergence_threshold"] = *rc.convergence_threshold;
    j["model_config"] = {{"alpha0", rc.model_config.alpha0},
                         {"beta0", rc.model_config.beta0},
                         {"psi", rc.model_config.psi},
                         {"volume_A", rc.volume_from_data ? json() : json(rc.model_config.volume_A)},
                         {"mu_gamma", {rc.model_config.mu_gamma.x, rc.model_config.mu_gamma.y,
                                       rc.model_config.mu_gamma.z}},
                         {"sigma_gamma", rc.model_config.sigma_gamma},
                         {"full_dim_q", rc.model_config.full_dim_q}};
    j["proposal"] = {{"p_reject", rc.proposal.p_reject},
                     {"use_fast_ratio", rc.proposal.use_fast_ratio},
                     {"lambda_updates_per_iter", rc.proposal.lambda_updates_per_iter}};
    j["angle_proposal"] = {{"width12", rc.angle_proposal.width12},
                           {"width13", rc.angle_proposal.width13},
                           {"width23", rc.angle_proposal.width23}};
    if (rc.init_jumps) {
        const JumpConfig& jc = *rc.init_jumps;
        j["init_jumps"] = {{"enabled", true},
                           {"p_n", jc.p_n},
                           {"p_r", jc.p_r},
                           {"p_t", jc.p_t},
                           {"p_f", jc.p_f},
                           {"sigma_T", jc.sigma_T},
                           {"n_settle", jc.n_settle},
                           {"n_initialisation", jc.n_initialisation},
                           {"delay", jc.delay}};
    }
    json il;
    il["type"] = rc.init_lambda == InitLambdaKind::all_unmatched ? "all_unmatched"
                 : rc.init_lambda == InitLambdaKind::random      ? "random"
                                                                 : "from_csv";
    if (rc.init_lambda == InitLambdaKind::from_csv) il["path"] = rc.init_lambda_csv.string();
    j["init_lambda"] = il;
    return j.dump(2) + "\n";
}

}  // namespace pointmatch::io
