#pragma once

#include "filtop/circulant.hpp"
#include "filtop/filter.hpp"
#include "filtop/grid.hpp"
#include "filtop/ode.hpp"
#include "filtop/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace filtop {

/// Random superposition of cosine waves:
///   u0(x) = sum_{k=0}^{K} (1 + eps) / (5 + k)^2 * cos(2 pi k x + theta),
/// with eps ~ N(0, amplitude_noise_std^2) and theta ~ U[0, 2 pi) drawn once
/// per (seed, dataset, index).
struct InitialConditionSpec {
    int max_frequency = 250;  // K
    double amplitude_noise_std = 0.44721359549995793;  // sqrt(1/5)
    std::uint64_t seed = 1;
    int count = 1;  // n_IC
};

enum class DatasetName { Train, Valid, Test, Long };

const char* dataset_id(DatasetName name);
DatasetName parse_dataset_name(const std::string& name);

/// Per-dataset generation sizes: initial conditions, time points, horizon.
struct DatasetParams {
    int n_ic = 1;
    int n_t = 1;
    double horizon = 0.0;
};

/// Default sizes: train (1000, 50, 0.1), valid (20, 10, 1), test (100, 20, 1),
/// long (50, 500, 100).
DatasetParams default_dataset_params(DatasetName name);

/// n_t stamps uniformly spaced on [0, horizon], inclusive at both ends;
/// a single stamp degenerates to {0}.
std::vector<double> dataset_time_stamps(const DatasetParams& params);

/// Draws initial condition `index` of a dataset on the given grid. The draw is
/// keyed by (seed, dataset id, index), so it does not depend on generation
/// order. Requires max_frequency < N/2 so the grid resolves every wave.
Vector sample_initial_condition(const InitialConditionSpec& spec, DatasetName name, int index,
                                const Grid& grid);

/// Fine-grid snapshots only: states and exact right-hand-side derivatives.
/// Column ic * n_t + j holds trajectory ic at stamp j; times mirrors that
/// layout with one entry per column.
struct FineDataset {
    Matrix U;     // N x d
    Matrix Udot;  // N x d
    std::vector<double> times;
    int n_ic = 0;
    int n_t = 0;

    int columns() const { return n_ic * n_t; }
};

/// Fine + filtered snapshots. Ubar = W U and Ubar_dot = W Udot exactly.
struct SnapshotSet {
    Matrix U;         // N x d
    Matrix Udot;      // N x d
    Matrix Ubar;      // M x d
    Matrix Ubar_dot;  // M x d
    std::vector<double> times;
    int n_ic = 0;
    int n_t = 0;

    int columns() const { return n_ic * n_t; }
    int column(int ic, int j) const { return ic * n_t + j; }
    /// The n_t stamps shared by every trajectory.
    std::vector<double> stamps() const;
};

/// Solves the fine-grid convection system for each initial condition and
/// collects states and A u derivatives at the dataset's stamps. Solves run in
/// parallel across initial conditions; a failed solve throws NumericalError
/// tagged with the offending index.
FineDataset generate_fine_dataset(DatasetName name, const Grid& fine,
                                  const InitialConditionSpec& spec, const SolverConfig& cfg,
                                  std::optional<DatasetParams> params = std::nullopt);

/// Attaches the filtered views Ubar, Ubar_dot to fine snapshots.
SnapshotSet make_snapshot_set(const FilterMatrix& filter, FineDataset fine);

/// Filtered-only set: Ubar, Ubar_dot and the layout, fine matrices left
/// empty. Enough for evaluation and the non-intrusive fits.
SnapshotSet filtered_snapshot_set(const FilterMatrix& filter, const FineDataset& fine);

/// generate_fine_dataset followed by make_snapshot_set.
SnapshotSet generate_dataset(DatasetName name, const FilterMatrix& filter,
                             const InitialConditionSpec& spec, const SolverConfig& cfg,
                             std::optional<DatasetParams> params = std::nullopt);

}  // namespace filtop
