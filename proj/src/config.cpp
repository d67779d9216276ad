#include "filtop/config.hpp"

#include "filtop/csv.hpp"
#include "filtop/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace filtop {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: field '" + key + "': not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: field '" + key + "': not an integer: '" + value + "'");
    }
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_real(key, item));
    }
    if (out.empty()) throw ValidationError("config: field '" + key + "': empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (double v : parse_real_list(key, value)) out.push_back(static_cast<int>(v));
    return out;
}

std::string join(const std::vector<double>& values) {
    std::string s;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) s += ",";
        s += format_double(values[i]);
    }
    return s;
}

std::string join(const std::vector<int>& values) {
    std::string s;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(values[i]);
    }
    return s;
}

}  // namespace

DatasetParams ExperimentConfig::params_for(DatasetName name) const {
    switch (name) {
        case DatasetName::Train: return train;
        case DatasetName::Valid: return valid;
        case DatasetName::Test: return test;
        case DatasetName::Long: return long_run;
    }
    return {};
}

FilterSpec ExperimentConfig::filter_spec() const {
    return FilterSpec{filter, h0, radius_variation, z_max};
}

InitialConditionSpec ExperimentConfig::ic_spec(int n_ic) const {
    return InitialConditionSpec{k_max, amp_noise_std, seed, n_ic};
}

void ExperimentConfig::validate() const {
    if (n_fine < 7) throw ValidationError("config: n_fine must be >= 7");
    if (m_coarse < 7) throw ValidationError("config: m_coarse must be >= 7");
    if (m_coarse > n_fine) throw ValidationError("config: m_coarse must be <= n_fine");
    for (int m : m_list)
        if (m < 7 || m > n_fine) throw ValidationError("config: m_list entries must lie in [7, n_fine]");
    if (!(h0 > 0.0)) throw ValidationError("config: h0 must be positive");
    if (!(std::abs(radius_variation) < 1.0))
        throw ValidationError("config: |radius_variation| must be < 1");
    if (z_max < 1) throw ValidationError("config: z_max must be >= 1");
    if (k_max < 0) throw ValidationError("config: k_max must be >= 0");
    if (2 * k_max >= n_fine)
        throw ValidationError("config: k_max must be < n_fine / 2 so the fine grid resolves it");
    if (amp_noise_std < 0.0) throw ValidationError("config: amp_noise_std must be >= 0");
    for (const auto& [label, p] : {std::pair<const char*, DatasetParams>{"train", train},
                                   {"valid", valid},
                                   {"test", test},
                                   {"long", long_run}}) {
        if (p.n_ic < 1) throw ValidationError(std::string("config: ") + label + "_n_ic must be >= 1");
        if (p.n_t < 1) throw ValidationError(std::string("config: ") + label + "_n_t must be >= 1");
        if (p.horizon < 0.0)
            throw ValidationError(std::string("config: ") + label + "_horizon must be >= 0");
    }
    if (!(solver.abs_tol > 0.0) || !(solver.rel_tol > 0.0))
        throw ValidationError("config: solver tolerances must be positive");
    if (solver.max_steps < 1) throw ValidationError("config: max_steps must be >= 1");
    if (lambda_grid.empty()) throw ValidationError("config: lambda_grid must not be empty");
    for (double v : lambda_grid)
        if (v < 0.0) throw ValidationError("config: lambda_grid entries must be >= 0");
    for (double v : emb_lambda_grid)
        if (v < 0.0) throw ValidationError("config: emb_lambda_grid entries must be >= 0");
    if (optimizer.iterations < 0) throw ValidationError("config: adam_iterations must be >= 0");
    if (!(optimizer.step_size > 0.0)) throw ValidationError("config: adam_step_size must be positive");
    if (optimizer.batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
    if (output_dir.empty()) throw ValidationError("config: output_dir must not be empty");
}

void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "n_fine") c.n_fine = static_cast<int>(parse_int(key, value));
    else if (key == "m_coarse") c.m_coarse = static_cast<int>(parse_int(key, value));
    else if (key == "m_list") c.m_list = parse_int_list(key, value);
    else if (key == "filter") c.filter = parse_filter_kind(value);
    else if (key == "h0") c.h0 = parse_real(key, value);
    else if (key == "radius_variation") c.radius_variation = parse_real(key, value);
    else if (key == "z_max") c.z_max = static_cast<int>(parse_int(key, value));
    else if (key == "k_max") c.k_max = static_cast<int>(parse_int(key, value));
    else if (key == "amp_noise_std") c.amp_noise_std = parse_real(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "train_n_ic") c.train.n_ic = static_cast<int>(parse_int(key, value));
    else if (key == "train_n_t") c.train.n_t = static_cast<int>(parse_int(key, value));
    else if (key == "train_horizon") c.train.horizon = parse_real(key, value);
    else if (key == "valid_n_ic") c.valid.n_ic = static_cast<int>(parse_int(key, value));
    else if (key == "valid_n_t") c.valid.n_t = static_cast<int>(parse_int(key, value));
    else if (key == "valid_horizon") c.valid.horizon = parse_real(key, value);
    else if (key == "test_n_ic") c.test.n_ic = static_cast<int>(parse_int(key, value));
    else if (key == "test_n_t") c.test.n_t = static_cast<int>(parse_int(key, value));
    else if (key == "test_horizon") c.test.horizon = parse_real(key, value);
    else if (key == "long_n_ic") c.long_run.n_ic = static_cast<int>(parse_int(key, value));
    else if (key == "long_n_t") c.long_run.n_t = static_cast<int>(parse_int(key, value));
    else if (key == "long_horizon") c.long_run.horizon = parse_real(key, value);
    else if (key == "abs_tol") c.solver.abs_tol = parse_real(key, value);
    else if (key == "rel_tol") c.solver.rel_tol = parse_real(key, value);
    else if (key == "max_steps") c.solver.max_steps = parse_int(key, value);
    else if (key == "rk4_steps_per_interval")
        c.solver.rk4_steps_per_interval = static_cast<int>(parse_int(key, value));
    else if (key == "lambda_grid") c.lambda_grid = parse_real_list(key, value);
    else if (key == "emb_lambda_grid") c.emb_lambda_grid = parse_real_list(key, value);
    else if (key == "adam_iterations") c.optimizer.iterations = static_cast<int>(parse_int(key, value));
    else if (key == "adam_step_size") c.optimizer.step_size = parse_real(key, value);
    else if (key == "adam_beta1") c.optimizer.beta1 = parse_real(key, value);
    else if (key == "adam_beta2") c.optimizer.beta2 = parse_real(key, value);
    else if (key == "adam_eps") c.optimizer.eps_hat = parse_real(key, value);
    else if (key == "batch_size") c.optimizer.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "opt_seed") c.optimizer.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "steps_per_unit_time")
        c.optimizer.steps_per_unit_time = static_cast<int>(parse_int(key, value));
    else if (key == "output_dir") c.output_dir = value;
    else throw ValidationError("config: unknown field '" + key + "'");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: " + path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        try {
            apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "# filtop experiment configuration\n";
    out << "n_fine = " << c.n_fine << "\n";
    out << "m_coarse = " << c.m_coarse << "\n";
    out << "m_list = " << join(c.m_list) << "\n";
    out << "filter = " << filter_name(c.filter) << "\n";
    out << "h0 = " << format_double(c.h0) << "\n";
    out << "radius_variation = " << format_double(c.radius_variation) << "\n";
    out << "z_max = " << c.z_max << "\n";
    out << "k_max = " << c.k_max << "\n";
    out << "amp_noise_std = " << format_double(c.amp_noise_std) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "train_n_ic = " << c.train.n_ic << "\n";
    out << "train_n_t = " << c.train.n_t << "\n";
    out << "train_horizon = " << format_double(c.train.horizon) << "\n";
    out << "valid_n_ic = " << c.valid.n_ic << "\n";
    out << "valid_n_t = " << c.valid.n_t << "\n";
    out << "valid_horizon = " << format_double(c.valid.horizon) << "\n";
    out << "test_n_ic = " << c.test.n_ic << "\n";
    out << "test_n_t = " << c.test.n_t << "\n";
    out << "test_horizon = " << format_double(c.test.horizon) << "\n";
    out << "long_n_ic = " << c.long_run.n_ic << "\n";
    out << "long_n_t = " << c.long_run.n_t << "\n";
    out << "long_horizon = " << format_double(c.long_run.horizon) << "\n";
    out << "abs_tol = " << format_double(c.solver.abs_tol) << "\n";
    out << "rel_tol = " << format_double(c.solver.rel_tol) << "\n";
    out << "max_steps = " << c.solver.max_steps << "\n";
    out << "rk4_steps_per_interval = " << c.solver.rk4_steps_per_interval << "\n";
    out << "lambda_grid = " << join(c.lambda_grid) << "\n";
    out << "emb_lambda_grid = " << join(c.emb_lambda_grid) << "\n";
    out << "adam_iterations = " << c.optimizer.iterations << "\n";
    out << "adam_step_size = " << format_double(c.optimizer.step_size) << "\n";
    out << "adam_beta1 = " << format_double(c.optimizer.beta1) << "\n";
    out << "adam_beta2 = " << format_double(c.optimizer.beta2) << "\n";
    out << "adam_eps = " << format_double(c.optimizer.eps_hat) << "\n";
    out << "batch_size = " << c.optimizer.batch_size << "\n";
    out << "opt_seed = " << c.optimizer.seed << "\n";
    out << "steps_per_unit_time = " << c.optimizer.steps_per_unit_time << "\n";
    out << "output_dir = " << c.output_dir << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace filtop
