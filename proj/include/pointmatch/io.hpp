// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pointmatch/experiments.hpp"

namespace pointmatch::io {

/// Configuration / usage problems; the CLI maps these to exit code 1 and
/// everything else to 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// CSV with header id,x,y,z. Errors carry the offending line number.
PointSet read_pointset(const std::filesystem::path& path);
void write_pointset(const std::filesystem::path& path, const PointSet& ps);

/// CSV with header x_id,mu_id; mu_id is a mu label or the literal
/// "unmatched". X ids absent from the file belong to neither list.
GroundTruth read_truth(const std::filesystem::path& path, const PointSet& x, const PointSet& mu);

/// Per-axis extent maximized across the two sets, multiplied out. The default
/// |A| when a config leaves volume_A null.
double volume_bounding_box(const PointSet& x, const PointSet& mu);

enum class InitLambdaKind { all_unmatched, random, from_csv };

struct RunConfig {
    ModelKind model = ModelKind::procrustes;
    std::filesystem::path x_csv, mu_csv;
    std::optional<std::filesystem::path> truth_csv;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;

    std::int64_t n_iter = 0, burn_in = 0, thin = 1, check_every = 1000;
    std::optional<int> convergence_threshold;

    ModelConfig model_config;          // volume_A <= 0 means "compute from data"
    bool volume_from_data = true;
    ProposalConfig proposal;
    AngleProposalConfig angle_proposal;

    std::optional<JumpConfig> init_jumps;  // procrustes only

    InitLambdaKind init_lambda = InitLambdaKind::all_unmatched;
    std::filesystem::path init_lambda_csv;

    void validate() const;
};

struct SimOutputConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_csv;
    std::vector<ModelKind> models;
    std::vector<double> s_values;
    SimConfig sim;  // sim.s is overridden per sweep value
    ModelConfig model_config;
    bool volume_from_data = true;  // null volume -> (2L)^3
    ProposalConfig proposal;
    AngleProposalConfig angle_proposal;
};

struct LaplaceCandidate {
    std::string name;
    std::vector<std::pair<std::string, std::string>> matches;  // x_id -> mu_id | "unmatched"
};

struct LaplaceRunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path x_csv, mu_csv, output_csv;
    double tau = 1.0;
    std::int64_t n_mc = 100000;
    ModelConfig model_config;
    bool volume_from_data = true;
    std::vector<LaplaceCandidate> candidates;
};

/// Turn a candidate's id map into a match matrix; x ids not listed stay
/// unmatched.
MatchMatrix resolve_candidate(const LaplaceCandidate& cand, const PointSet& x, const PointSet& mu);

RunConfig parse_run_config(const std::filesystem::path& path);
SimOutputConfig parse_sim_config(const std::filesystem::path& path);
LaplaceRunConfig parse_laplace_config(const std::filesystem::path& path);

/// Key-sorted JSON text of the parsed config; parse(serialize(c)) == c.
std::string canonical_run_config(const RunConfig& cfg);

/// Subcommand drivers. Each writes its output files and returns 0; errors
/// propagate as exceptions.
int run_fit(const std::filesystem::path& config_path);
int run_simulate(const std::filesystem::path& config_path);
int run_laplace(const std::filesystem::path& config_path);
int run_validate(const std::filesystem::path& config_path);

}  // namespace pointmatch::io
