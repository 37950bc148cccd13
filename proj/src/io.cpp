// SPDX-License-Identifier: Apache-2.0

#include "pointmatch/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace pointmatch::io {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": bad coordinate '" + s +
                    "'");
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return j;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& ctx) {
    if (!obj.is_object()) throw ConfigError(ctx + ": expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(ctx + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T def, const std::string& ctx) {
    if (!obj.contains(key) || obj.at(key).is_null()) return def;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(ctx + "." + key + ": " + e.what());
    }
}

Vec3 get_vec3(const json& obj, const char* key, Vec3 def, const std::string& ctx) {
    if (!obj.contains(key) || obj.at(key).is_null()) return def;
    const auto& a = obj.at(key);
    if (!a.is_array() || a.size() != 3) throw ConfigError(ctx + "." + key + ": expected [x, y, z]");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

ModelKind parse_model_kind(const std::string& s, const std::string& ctx) {
    if (s == "procrustes") return ModelKind::procrustes;
    if (s == "configuration") return ModelKind::configuration;
    throw ConfigError(ctx + ": model must be 'procrustes' or 'configuration', got '" + s + "'");
}

void parse_model_config(const json& parent, ModelConfig& mc, bool& volume_from_data,
                        const std::string& ctx) {
    if (!parent.contains("model_config")) return;
    const json& j = parent.at("model_config");
    check_keys(j, {"alpha0", "beta0", "psi", "volume_A", "mu_gamma", "sigma_gamma", "full_dim_q"},
               ctx + ".model_config");
    mc.alpha0 = get_or(j, "alpha0", mc.alpha0, ctx);
    mc.beta0 = get_or(j, "beta0", mc.beta0, ctx);
    mc.psi = get_or(j, "psi", mc.psi, ctx);
    mc.mu_gamma = get_vec3(j, "mu_gamma", mc.mu_gamma, ctx);
    mc.sigma_gamma = get_or(j, "sigma_gamma", mc.sigma_gamma, ctx);
    mc.full_dim_q = get_or(j, "full_dim_q", mc.full_dim_q, ctx);
    if (j.contains("volume_A") && !j.at("volume_A").is_null()) {
        mc.volume_A = j.at("volume_A").get<double>();
        volume_from_data = false;
    }
}

void parse_proposal(const json& parent, ProposalConfig& pc, const std::string& ctx) {
    if (!parent.contains("proposal")) return;
    const json& j = parent.at("proposal");
    check_keys(j, {"p_reject", "use_fast_ratio", "lambda_updates_per_iter"}, ctx + ".proposal");
    pc.p_reject = get_or(j, "p_reject", pc.p_reject, ctx);
    pc.use_fast_ratio = get_or(j, "use_fast_ratio", pc.use_fast_ratio, ctx);
    pc.lambda_updates_per_iter =
        get_or(j, "lambda_updates_per_iter", pc.lambda_updates_per_iter, ctx);
}

void parse_angle_proposal(const json& parent, AngleProposalConfig& ac, const std::string& ctx) {
    if (!parent.contains("angle_proposal")) return;
    const json& j = parent.at("angle_proposal");
    check_keys(j, {"width12", "width13", "width23"}, ctx + ".angle_proposal");
    ac.width12 = get_or(j, "width12", ac.width12, ctx);
    ac.width13 = get_or(j, "width13", ac.width13, ctx);
    ac.width23 = get_or(j, "width23", ac.width23, ctx);
}

}  // namespace

PointSet read_pointset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open point file: " + path.string());
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
    ++line_no;
    {
        auto hdr = split_csv_line(line);
        if (hdr != std::vector<std::string>{"id", "x", "y", "z"})
            throw Error(path.string() + ":1: expected header 'id,x,y,z'");
    }
    Coords coords;
    std::vector<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4)
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
        if (f[0].empty())
            throw Error(path.string() + ":" + std::to_string(line_no) + ": empty id");
        for (const auto& id : ids)
            if (id == f[0])
                throw Error(path.string() + ":" + std::to_string(line_no) + ": duplicate id '" +
                            f[0] + "'");
        coords.push_back({parse_double(f[1], path, line_no), parse_double(f[2], path, line_no),
                          parse_double(f[3], path, line_no)});
        ids.push_back(f[0]);
    }
    if (coords.empty()) throw Error(path.string() + ": no data rows");
    return PointSet::make(std::move(coords), std::move(ids));
}

void write_pointset(const std::filesystem::path& path, const PointSet& ps) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write: " + path.string());
    out << "id,x,y,z\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Vec3 p = ps.point(i);
        out << ps.ids[i] << ',' << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(p.z) << '\n';
    }
}

GroundTruth read_truth(const std::filesystem::path& path, const PointSet& x, const PointSet& mu) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open truth file: " + path.string());
    std::unordered_map<std::string, std::size_t> x_index, mu_index;
    for (std::size_t i = 0; i < x.size(); ++i) x_index[x.ids[i]] = i;
    for (std::size_t j = 0; j < mu.size(); ++j) mu_index[mu.ids[j]] = j;

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
    ++line_no;
    if (split_csv_line(line) != std::vector<std::string>{"x_id", "mu_id"})
        throw Error(path.string() + ":1: expected header 'x_id,mu_id'");
    GroundTruth truth;
    std::vector<bool> seen(x.size(), false);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2)
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
        const auto xi = x_index.find(f[0]);
        if (xi == x_index.end())
            throw Error(path.string() + ":" + std::to_string(line_no) + ": unknown x id '" + f[0] +
                        "'");
        if (seen[xi->second])
            throw Error(path.string() + ":" + std::to_string(line_no) + ": repeated x id '" + f[0] +
                        "'");
        seen[xi->second] = true;
        if (f[1] == "unmatched") {
            truth.unmatched.push_back(xi->second);
        } else {
            const auto mi = mu_index.find(f[1]);
            if (mi == mu_index.end())
                throw Error(path.string() + ":" + std::to_string(line_no) + ": unknown mu id '" +
                            f[1] + "'");
            truth.pairs.emplace_back(xi->second, mi->second);
        }
    }
    return truth;
}

double volume_bounding_box(const PointSet& x, const PointSet& mu) {
    auto extents = [](const PointSet& ps) {
        Vec3 lo = ps.point(0), hi = ps.point(0);
        for (std::size_t i = 1; i < ps.size(); ++i) {
            const Vec3 p = ps.point(i);
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        return hi - lo;
    };
    const Vec3 ex = extents(x), em = extents(mu);
    return std::max(ex.x, em.x) * std::max(ex.y, em.y) * std::max(ex.z, em.z);
}

void RunConfig::validate() const {
    if (n_iter <= burn_in || burn_in < 0) throw ConfigError("iterations: require n_iter > burn_in >= 0");
    if (thin < 1) throw ConfigError("iterations: thin must be >= 1");
    proposal.validate();
    angle_proposal.validate();
    if (init_jumps) {
        if (model != ModelKind::procrustes)
            throw ConfigError("init_jumps apply to the procrustes model only");
        init_jumps->validate();
    }
    if (init_lambda == InitLambdaKind::from_csv && init_lambda_csv.empty())
        throw ConfigError("init_lambda: from_csv requires a path");
}

RunConfig parse_run_config(const std::filesystem::path& path) {
    const json j = load_json(path);
    const std::string ctx = "run config";
    check_keys(j,
               {"model", "x_csv", "mu_csv", "truth_csv", "output_dir", "seed", "iterations",
                "model_config", "proposal", "angle_proposal", "init_jumps", "init_lambda"},
               ctx);
    RunConfig rc;
    rc.model = parse_model_kind(require<std::string>(j, "model", ctx), ctx);
    rc.x_csv = require<std::string>(j, "x_csv", ctx);
    rc.mu_csv = require<std::string>(j, "mu_csv", ctx);
    if (j.contains("truth_csv") && !j.at("truth_csv").is_null())
        rc.truth_csv = std::filesystem::path(j.at("truth_csv").get<std::string>());
    rc.output_dir = require<std::string>(j, "output_dir", ctx);
    rc.seed = require<std::uint64_t>(j, "seed", ctx);

    const json& it = j.contains("iterations") ? j.at("iterations") : json::object();
    check_keys(it, {"n_iter", "burn_in", "thin", "check_every", "convergence_threshold"},
               ctx + ".iterations");
    rc.n_iter = require<std::int64_t>(it, "n_iter", ctx + ".iterations");
    rc.burn_in = get_or<std::int64_t>(it, "burn_in", 0, ctx);
    rc.thin = get_or<std::int64_t>(it, "thin", 1, ctx);
    rc.check_every = get_or<std::int64_t>(it, "check_every", 1000, ctx);
    if (it.contains("convergence_threshold") && !it.at("convergence_threshold").is_null())
        rc.convergence_threshold = it.at("convergence_threshold").get<int>();

    parse_model_config(j, rc.model_config, rc.volume_from_data, ctx);
    parse_proposal(j, rc.proposal, ctx);
    parse_angle_proposal(j, rc.angle_proposal, ctx);

    if (j.contains("init_jumps") && !j.at("init_jumps").is_null()) {
        const json& ij = j.at("init_jumps");
        check_keys(ij,
                   {"enabled", "p_n", "p_r", "p_t", "p_f", "sigma_T", "n_settle",
                    "n_initialisation", "delay"},
                   ctx + ".init_jumps");
        if (get_or(ij, "enabled", true, ctx)) {
            JumpConfig jc;
            jc.p_n = get_or(ij, "p_n", jc.p_n, ctx);
            jc.p_r = get_or(ij, "p_r", jc.p_r, ctx);
            jc.p_t = get_or(ij, "p_t", jc.p_t, ctx);
            jc.p_f = get_or(ij, "p_f", jc.p_f, ctx);
            jc.sigma_T = get_or(ij, "sigma_T", jc.sigma_T, ctx);
            jc.n_settle = get_or(ij, "n_settle", jc.n_settle, ctx);
            jc.n_initialisation = get_or(ij, "n_initialisation", jc.n_initialisation, ctx);
            jc.delay = get_or(ij, "delay", jc.delay, ctx);
            rc.init_jumps = jc;
        }
    }

    if (j.contains("init_lambda") && !j.at("init_lambda").is_null()) {
        const json& il = j.at("init_lambda");
        check_keys(il, {"type", "path"}, ctx + ".init_lambda");
        const auto type = require<std::string>(il, "type", ctx + ".init_lambda");
        if (type == "all_unmatched") {
            rc.init_lambda = InitLambdaKind::all_unmatched;
        } else if (type == "random") {
            rc.init_lambda = InitLambdaKind::random;
        } else if (type == "from_csv") {
            rc.init_lambda = InitLambdaKind::from_csv;
            rc.init_lambda_csv = require<std::string>(il, "path", ctx + ".init_lambda");
        } else {
            throw ConfigError(ctx + ".init_lambda.type: unknown type '" + type + "'");
        }
    }

    rc.validate();
    return rc;
}

SimOutputConfig parse_sim_config(const std::filesystem::path& path) {
    const json j = load_json(path);
    const std::string ctx = "sim config";
    check_keys(j,
               {"seed", "output_csv", "models", "s_values", "sim", "model_config", "proposal",
                "angle_proposal"},
               ctx);
    SimOutputConfig sc;
    sc.seed = require<std::uint64_t>(j, "seed", ctx);
    sc.output_csv = require<std::string>(j, "output_csv", ctx);

    const auto model_names = require<std::vector<std::string>>(j, "models", ctx);
    if (model_names.empty()) throw ConfigError(ctx + ": models must be nonempty");
    for (const auto& m : model_names) sc.models.push_back(parse_model_kind(m, ctx));

    sc.s_values = require<std::vector<double>>(j, "s_values", ctx);
    if (sc.s_values.empty()) throw ConfigError(ctx + ": s_values must be nonempty");

    const json& sj = j.contains("sim") ? j.at("sim") : json::object();
    check_keys(sj, {"L", "d_min", "M", "N", "n_ones", "n_iter", "K"}, ctx + ".sim");
    sc.sim.L = get_or(sj, "L", sc.sim.L, ctx);
    sc.sim.d_min = get_or(sj, "d_min", sc.sim.d_min, ctx);
    sc.sim.M = get_or(sj, "M", sc.sim.M, ctx);
    sc.sim.N = get_or(sj, "N", sc.sim.N, ctx);
    sc.sim.n_ones = get_or(sj, "n_ones", sc.sim.n_ones, ctx);
    sc.sim.n_iter = get_or(sj, "n_iter", sc.sim.n_iter, ctx);
    sc.sim.K = get_or(sj, "K", sc.sim.K, ctx);

    parse_model_config(j, sc.model_config, sc.volume_from_data, ctx);
    parse_proposal(j, sc.proposal, ctx);
    parse_angle_proposal(j, sc.angle_proposal, ctx);

    for (double s : sc.s_values) {
        SimConfig probe = sc.sim;
        probe.s = s;
        probe.validate();
    }
    return sc;
}

LaplaceRunConfig parse_laplace_config(const std::filesystem::path& path) {
    const json j = load_json(path);
    const std::string ctx = "laplace config";
    check_keys(j, {"seed", "x_csv", "mu_csv", "output_csv", "tau", "n_mc", "model_config",
                   "candidates"},
               ctx);
    LaplaceRunConfig lc;
    lc.seed = require<std::uint64_t>(j, "seed", ctx);
    lc.x_csv = require<std::string>(j, "x_csv", ctx);
    lc.mu_csv = require<std::string>(j, "mu_csv", ctx);
    lc.output_csv = require<std::string>(j, "output_csv", ctx);
    lc.tau = require<double>(j, "tau", ctx);
    lc.n_mc = get_or<std::int64_t>(j, "n_mc", lc.n_mc, ctx);
    parse_model_config(j, lc.model_config, lc.volume_from_data, ctx);

    if (!j.contains("candidates") || !j.at("candidates").is_array() || j.at("candidates").empty())
        throw ConfigError(ctx + ": candidates must be a nonempty array");
    for (const auto& cj : j.at("candidates")) {
        check_keys(cj, {"name", "matches"}, ctx + ".candidates[]");
        LaplaceCandidate cand;
        cand.name = require<std::string>(cj, "name", ctx + ".candidates[]");
        if (cj.contains("matches")) {
            if (!cj.at("matches").is_object())
                throw ConfigError(ctx + ".candidates[].matches: expected an object");
            for (const auto& [xid, mid] : cj.at("matches").items())
                cand.matches.emplace_back(xid, mid.get<std::string>());
        }
        lc.candidates.push_back(std::move(cand));
    }
    return lc;
}

MatchMatrix resolve_candidate(const LaplaceCandidate& cand, const PointSet& x,
                              const PointSet& mu) {
    std::unordered_map<std::string, std::size_t> x_index, mu_index;
    for (std::size_t i = 0; i < x.size(); ++i) x_index[x.ids[i]] = i;
    for (std::size_t j = 0; j < mu.size(); ++j) mu_index[mu.ids[j]] = j;
    MatchMatrix mm = MatchMatrix::all_unmatched(x.size(), std::int32_t(mu.size()));
    for (const auto& [xid, mid] : cand.matches) {
        const auto xi = x_index.find(xid);
        if (xi == x_index.end())
            throw ConfigError("candidate '" + cand.name + "': unknown x id '" + xid + "'");
        if (mid == "unmatched") continue;
        const auto mi = mu_index.find(mid);
        if (mi == mu_index.end())
            throw ConfigError("candidate '" + cand.name + "': unknown mu id '" + mid + "'");
        mm.assign[xi->second] = std::int32_t(mi->second);
    }
    return mm;
}

}  // namespace pointmatch::io
