#pragma once

#include "filtop/dns.hpp"
#include "filtop/filter.hpp"
#include "filtop/inference.hpp"
#include "filtop/ode.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace filtop {

/// Every knob of the pipeline, loadable from a flat "key = value" text file
/// with '#' comments. The serialized form reproduces the run bit for bit.
struct ExperimentConfig {
    int n_fine = 1000;
    int m_coarse = 100;
    std::vector<int> m_list = {20, 40, 60, 80, 100, 150, 200};

    FilterKind filter = FilterKind::TopHat;
    double h0 = 1.0 / 50.0;
    double radius_variation = 1.0 / 3.0;
    int z_max = 1;

    int k_max = 250;
    double amp_noise_std = 0.44721359549995793;
    std::uint64_t seed = 1;

    DatasetParams train = default_dataset_params(DatasetName::Train);
    DatasetParams valid = default_dataset_params(DatasetName::Valid);
    DatasetParams test = default_dataset_params(DatasetName::Test);
    DatasetParams long_run = default_dataset_params(DatasetName::Long);

    SolverConfig solver;
    std::vector<double> lambda_grid = RegularizationConfig::default_lambda_grid();
    std::vector<double> emb_lambda_grid = {0.0, 1e-6, 1e-3};
    OptimizerConfig optimizer;

    std::string output_dir = "out";

    DatasetParams params_for(DatasetName name) const;
    FilterSpec filter_spec() const;
    InitialConditionSpec ic_spec(int n_ic) const;

    /// Post-parse sanity checks; throws ValidationError naming the bad field.
    void validate() const;
};

/// Parses a config file; unknown keys and malformed values are reported with
/// their line number. Missing keys keep their defaults.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one "key=value" assignment (the config file grammar, also used for
/// CLI overrides).
void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Writes the full config, one key per line, suitable for reloading.
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace filtop
