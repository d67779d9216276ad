#pragma once

#include "filtop/dns.hpp"
#include "filtop/inference.hpp"
#include "filtop/ode.hpp"
#include "filtop/types.hpp"

#include <string>
#include <vector>

namespace filtop {

/// Mean relative prediction error per time stamp for one operator on one
/// dataset. A trajectory that blows up contributes +inf from the failure
/// time onward.
struct ErrorCurve {
    std::vector<double> times;
    std::vector<double> errors;
    std::string dataset;
    std::string route;
    int m = 0;
};

/// e(t) = mean over initial conditions of ||S(op, ubar(0), t) - ubar(t)|| /
/// ||ubar(t)||, with S the adaptive solver under cfg. Trajectories must start
/// at t = 0. All initial conditions are integrated as one block; if the block
/// solve fails the dataset is re-solved per trajectory so each curve records
/// its own blow-up point.
ErrorCurve error_curve(const Matrix& op, const SnapshotSet& data, const SolverConfig& cfg);

/// Arithmetic mean over the curve's stamps; +inf dominates.
double time_averaged_error(const ErrorCurve& curve);

/// Everything a route needs besides snapshots.
struct FitContext {
    const FilterMatrix* filter = nullptr;         // intrusive route
    const CirculantOperator* a_fine = nullptr;    // intrusive route
    Matrix a_coarse;                              // A^(M)
    Matrix d_coarse;                              // D^(M)
    SolverConfig solver;
    OptimizerConfig optimizer;                    // embedded route
};

struct GridPoint {
    double lambda_prior = 0.0;  // carries the single ridge lambda for the intrusive route
    double lambda_stab = 0.0;
    double valid_error = 0.0;
};

struct GridSearchResult {
    InferredOperator best;
    std::vector<GridPoint> table;
};

/// Refits (or retrains) per grid point and returns the operator with the
/// smallest time-averaged validation error; ties go to the larger
/// regularization. The intrusive and derivative-fit routes scan the given
/// grid (one and two dimensions respectively); the embedded route retrains
/// per point, so callers usually pass it a reduced grid. Throws
/// NumericalError if every grid point fails or blows up.
GridSearchResult grid_search(Route route, const SnapshotSet& train, const SnapshotSet& valid,
                             const std::vector<double>& lambda_grid, const FitContext& ctx);

struct SweepCell {
    std::string filter;
    std::string route;
    int m = 0;
    double lambda_prior = 0.0;
    double lambda_stab = 0.0;
    double avg_error = 0.0;  // +inf when the cell failed
    std::string message;     // failure note, empty on success
};

struct SweepResult {
    std::vector<int> m_values;
    std::vector<SweepCell> cells;
};

struct SweepRequest {
    std::vector<int> m_values = {20, 40, 60, 80, 100, 150, 200};
    std::vector<FilterKind> filters = {FilterKind::TopHat, FilterKind::Gaussian};
    std::vector<std::string> routes = {"baseline", "intrusive", "df"};  // "emb" opt-in
    FilterSpec filter_spec;  // kind overridden per cell
    std::vector<double> lambda_grid = RegularizationConfig::default_lambda_grid();
    std::vector<double> embedded_lambda_grid = {0.0, 1e-6, 1e-3};
    SolverConfig solver;
    OptimizerConfig optimizer;
};

/// Fits and scores every (filter, route, M) cell on the test data, selecting
/// hyperparameters on the validation data. The baseline route scores A^(M)
/// directly. Per-cell failures are recorded as +inf and the sweep continues.
SweepResult convergence_sweep(const Grid& fine, const FineDataset& train, const FineDataset& valid,
                              const FineDataset& test, const SweepRequest& req);

/// Error curves of several labelled operators on a long-horizon dataset.
std::vector<ErrorCurve> long_horizon_study(const std::vector<std::pair<std::string, Matrix>>& ops,
                                           const SnapshotSet& long_set, const SolverConfig& cfg);

}  // namespace filtop
