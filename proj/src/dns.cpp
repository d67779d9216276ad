#include "filtop/dns.hpp"

#include "filtop/errors.hpp"
#include "filtop/parallel.hpp"
#include "filtop/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace filtop {

const char* dataset_id(DatasetName name) {
    switch (name) {
        case DatasetName::Train: return "train";
        case DatasetName::Valid: return "valid";
        case DatasetName::Test: return "test";
        case DatasetName::Long: return "long";
    }
    return "?";
}

DatasetName parse_dataset_name(const std::string& name) {
    if (name == "train") return DatasetName::Train;
    if (name == "valid") return DatasetName::Valid;
    if (name == "test") return DatasetName::Test;
    if (name == "long") return DatasetName::Long;
    throw ValidationError("unknown dataset '" + name + "' (expected train, valid, test or long)");
}

DatasetParams default_dataset_params(DatasetName name) {
    switch (name) {
        case DatasetName::Train: return {1000, 50, 0.1};
        case DatasetName::Valid: return {20, 10, 1.0};
        case DatasetName::Test: return {100, 20, 1.0};
        case DatasetName::Long: return {50, 500, 100.0};
    }
    return {};
}

std::vector<double> dataset_time_stamps(const DatasetParams& params) {
    if (params.n_t < 1) throw ValidationError("dataset: n_t must be >= 1");
    if (params.horizon < 0.0) throw ValidationError("dataset: horizon must be >= 0");
    std::vector<double> t(static_cast<size_t>(params.n_t));
    if (params.n_t == 1) {
        t[0] = 0.0;
        return t;
    }
    for (int j = 0; j < params.n_t; ++j)
        t[static_cast<size_t>(j)] = params.horizon * static_cast<double>(j) / (params.n_t - 1);
    return t;
}

Vector sample_initial_condition(const InitialConditionSpec& spec, DatasetName name, int index,
                                const Grid& grid) {
    if (spec.max_frequency < 0)
        throw ValidationError("initial condition: max_frequency must be >= 0");
    if (2 * spec.max_frequency >= grid.n_points)
        throw ValidationError("initial condition: max_frequency " +
                              std::to_string(spec.max_frequency) + " is not resolved by " +
                              std::to_string(grid.n_points) + " grid points");

    RandomStream rng(stream_key(spec.seed, hash_name(dataset_id(name)),
                                static_cast<std::uint64_t>(index)));
    const double eps = spec.amplitude_noise_std * rng.normal();
    const double theta = 2.0 * std::numbers::pi * rng.uniform();

    Vector u0(grid.n_points);
    for (int n = 0; n < grid.n_points; ++n) {
        const double x = grid.point(n);
        double acc = 0.0;
        for (int k = 0; k <= spec.max_frequency; ++k) {
            const double amp = (1.0 + eps) / ((5.0 + k) * (5.0 + k));
            acc += amp * std::cos(2.0 * std::numbers::pi * k * x + theta);
        }
        u0(n) = acc;
    }
    return u0;
}

FineDataset generate_fine_dataset(DatasetName name, const Grid& fine,
                                  const InitialConditionSpec& spec, const SolverConfig& cfg,
                                  std::optional<DatasetParams> params) {
    const DatasetParams p = params.value_or(default_dataset_params(name));
    if (p.n_ic < 1) throw ValidationError("dataset: n_ic must be >= 1");
    const std::vector<double> stamps = dataset_time_stamps(p);
    const CirculantOperator a_fine = convection_operator(fine);

    FineDataset data;
    data.n_ic = p.n_ic;
    data.n_t = p.n_t;
    data.U.resize(fine.n_points, p.n_ic * p.n_t);
    data.Udot.resize(fine.n_points, p.n_ic * p.n_t);
    data.times.resize(static_cast<size_t>(p.n_ic * p.n_t));
    for (int ic = 0; ic < p.n_ic; ++ic)
        for (int j = 0; j < p.n_t; ++j)
            data.times[static_cast<size_t>(ic * p.n_t + j)] = stamps[static_cast<size_t>(j)];

    parallel_for(0, p.n_ic, [&](int ic) {
        const Vector u0 = sample_initial_condition(spec, name, ic, fine);
        OdeSolution sol = solve_ode(a_fine, u0, stamps, cfg);
        if (!sol.status.ok)
            throw NumericalError("dataset " + std::string(dataset_id(name)) + ", initial condition " +
                                 std::to_string(ic) + ": " + sol.status.message);
        Vector u(fine.n_points), du(fine.n_points);
        for (int j = 0; j < p.n_t; ++j) {
            u = sol.states[static_cast<size_t>(j)].col(0);
            a_fine.apply(u, du);
            data.U.col(ic * p.n_t + j) = u;
            data.Udot.col(ic * p.n_t + j) = du;
        }
    });
    return data;
}

SnapshotSet make_snapshot_set(const FilterMatrix& filter, FineDataset fine) {
    if (fine.U.rows() != filter.weights.cols())
        throw ValidationError("make_snapshot_set: fine snapshots do not match the filter's fine grid");
    SnapshotSet s;
    s.Ubar = filter_snapshots(filter, fine.U);
    s.Ubar_dot = filter_snapshots(filter, fine.Udot);
    s.U = std::move(fine.U);
    s.Udot = std::move(fine.Udot);
    s.times = std::move(fine.times);
    s.n_ic = fine.n_ic;
    s.n_t = fine.n_t;
    return s;
}

SnapshotSet filtered_snapshot_set(const FilterMatrix& filter, const FineDataset& fine) {
    if (fine.U.rows() != filter.weights.cols())
        throw ValidationError("filtered_snapshot_set: fine snapshots do not match the filter");
    SnapshotSet s;
    s.Ubar = filter_snapshots(filter, fine.U);
    s.Ubar_dot = filter_snapshots(filter, fine.Udot);
    s.times = fine.times;
    s.n_ic = fine.n_ic;
    s.n_t = fine.n_t;
    return s;
}

SnapshotSet generate_dataset(DatasetName name, const FilterMatrix& filter,
                             const InitialConditionSpec& spec, const SolverConfig& cfg,
                             std::optional<DatasetParams> params) {
    return make_snapshot_set(filter, generate_fine_dataset(name, filter.fine, spec, cfg, params));
}

std::vector<double> SnapshotSet::stamps() const {
    std::vector<double> t(times.begin(), times.begin() + n_t);
    return t;
}

}  // namespace filtop
