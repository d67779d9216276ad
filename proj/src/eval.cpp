#include "filtop/eval.hpp"

#include "filtop/errors.hpp"
#include "filtop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace filtop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative errors of one solved trajectory against its reference columns;
// entries past the last valid output are +inf.
void trajectory_errors(const OdeSolution& sol, const SnapshotSet& data, int ic, int col_of_ic,
                       std::vector<double>& out) {
    out.assign(static_cast<size_t>(data.n_t), kInf);
    for (int j = 0; j <= sol.status.last_valid_output && j < data.n_t; ++j) {
        const auto& pred = sol.states[static_cast<size_t>(j)];
        const Vector ref = data.Ubar.col(data.column(ic, j));
        const double ref_norm = ref.norm();
        const double diff = (pred.col(col_of_ic) - ref).norm();
        if (ref_norm > 0.0)
            out[static_cast<size_t>(j)] = diff / ref_norm;
        else
            out[static_cast<size_t>(j)] = diff == 0.0 ? 0.0 : kInf;
    }
}

}  // namespace

ErrorCurve error_curve(const Matrix& op, const SnapshotSet& data, const SolverConfig& cfg) {
    if (op.rows() != op.cols() || op.rows() != data.Ubar.rows())
        throw ValidationError("error_curve: operator does not match the filtered snapshots");
    if (data.n_ic < 1 || data.n_t < 1)
        throw ValidationError("error_curve: empty dataset");
    const std::vector<double> stamps = data.stamps();
    if (stamps.front() != 0.0)
        throw ValidationError("error_curve: trajectories must include their t = 0 state");

    ErrorCurve curve;
    curve.times = stamps;
    curve.m = static_cast<int>(op.rows());

    // All trajectories advance as one block; per-trajectory re-solve only if
    // the block hits a blow-up, so each curve gets its own failure time.
    Matrix u0(data.Ubar.rows(), data.n_ic);
    for (int ic = 0; ic < data.n_ic; ++ic) u0.col(ic) = data.Ubar.col(data.column(ic, 0));

    std::vector<std::vector<double>> per_ic(static_cast<size_t>(data.n_ic));
    OdeSolution block = solve_ode(op, u0, stamps, cfg);
    if (block.status.ok) {
        for (int ic = 0; ic < data.n_ic; ++ic)
            trajectory_errors(block, data, ic, ic, per_ic[static_cast<size_t>(ic)]);
    } else {
        parallel_for(0, data.n_ic, [&](int ic) {
            OdeSolution single = solve_ode(op, Matrix(u0.col(ic)), stamps, cfg);
            trajectory_errors(single, data, ic, 0, per_ic[static_cast<size_t>(ic)]);
        });
    }

    curve.errors.assign(static_cast<size_t>(data.n_t), 0.0);
    for (int j = 0; j < data.n_t; ++j) {
        double acc = 0.0;
        for (int ic = 0; ic < data.n_ic; ++ic) acc += per_ic[static_cast<size_t>(ic)][static_cast<size_t>(j)];
        curve.errors[static_cast<size_t>(j)] = acc / data.n_ic;
    }
    return curve;
}

double time_averaged_error(const ErrorCurve& curve) {
    if (curve.errors.empty()) throw ValidationError("time_averaged_error: empty curve");
    double acc = 0.0;
    for (double e : curve.errors) acc += e;
    return acc / static_cast<double>(curve.errors.size());
}

namespace {

double validation_error(const Matrix& op, const SnapshotSet& valid, const SolverConfig& cfg) {
    return time_averaged_error(error_curve(op, valid, cfg));
}

struct Candidate {
    InferredOperator op;
    GridPoint point;
    bool usable = false;
};

GridSearchResult pick_best(std::vector<Candidate> candidates, const std::string& route) {
    GridSearchResult result;
    bool have_best = false;
    double best_error = kInf;
    double best_reg = -1.0;
    for (auto& c : candidates) {
        result.table.push_back(c.point);
        if (!c.usable || !std::isfinite(c.point.valid_error)) continue;
        const double reg = c.point.lambda_prior + c.point.lambda_stab;
        const bool better = c.point.valid_error < best_error ||
                            (c.point.valid_error == best_error && reg > best_reg);
        if (!have_best || better) {
            have_best = true;
            best_error = c.point.valid_error;
            best_reg = reg;
            result.best = std::move(c.op);
        }
    }
    if (!have_best)
        throw NumericalError("grid_search: every " + route + " grid point failed or blew up");
    return result;
}

}  // namespace

GridSearchResult grid_search(Route route, const SnapshotSet& train, const SnapshotSet& valid,
                             const std::vector<double>& lambda_grid, const FitContext& ctx) {
    if (lambda_grid.empty()) throw ValidationError("grid_search: empty grid");

    std::vector<Candidate> candidates;

    if (route == Route::Intrusive) {
        if (!ctx.filter || !ctx.a_fine)
            throw ValidationError("grid_search: intrusive route needs the filter and fine operator");
        const Matrix gram = train.Ubar * train.Ubar.transpose();
        const Matrix cross = train.U * train.Ubar.transpose();
        candidates.resize(lambda_grid.size());
        parallel_for(0, static_cast<int>(lambda_grid.size()), [&](int i) {
            Candidate& c = candidates[static_cast<size_t>(i)];
            const double lambda = lambda_grid[static_cast<size_t>(i)];
            c.point.lambda_prior = lambda;
            try {
                Matrix recon = fit_reconstruction_from_grams(gram, cross, train.Ubar.cols(), lambda);
                c.op = intrusive_operator(*ctx.filter, *ctx.a_fine, recon);
                c.op.lambda = lambda;
                c.point.valid_error = validation_error(c.op.matrix, valid, ctx.solver);
                c.usable = true;
            } catch (const NumericalError&) {
                c.point.valid_error = kInf;
            }
        });
    } else if (route == Route::DerivativeFit) {
        const double inv_d = 1.0 / static_cast<double>(train.Ubar.cols());
        const Matrix gram = inv_d * (train.Ubar * train.Ubar.transpose());
        const Matrix cross = inv_d * (train.Ubar_dot * train.Ubar.transpose());
        const int n = static_cast<int>(lambda_grid.size());
        candidates.resize(static_cast<size_t>(n) * static_cast<size_t>(n));
        parallel_for(0, n * n, [&](int idx) {
            Candidate& c = candidates[static_cast<size_t>(idx)];
            const double lp = lambda_grid[static_cast<size_t>(idx / n)];
            const double ls = lambda_grid[static_cast<size_t>(idx % n)];
            c.point.lambda_prior = lp;
            c.point.lambda_stab = ls;
            try {
                c.op = fit_derivative_from_grams(gram, cross, ctx.a_coarse, ctx.d_coarse, lp, ls);
                c.point.valid_error = validation_error(c.op.matrix, valid, ctx.solver);
                c.usable = true;
            } catch (const NumericalError&) {
                c.point.valid_error = kInf;
            }
        });
    } else {
        const int n = static_cast<int>(lambda_grid.size());
        candidates.resize(static_cast<size_t>(n) * static_cast<size_t>(n));
        for (int idx = 0; idx < n * n; ++idx) {  // training is already parallel inside
            Candidate& c = candidates[static_cast<size_t>(idx)];
            const double lp = lambda_grid[static_cast<size_t>(idx / n)];
            const double ls = lambda_grid[static_cast<size_t>(idx % n)];
            c.point.lambda_prior = lp;
            c.point.lambda_stab = ls;
            try {
                c.op = fit_embedded(train, ctx.a_coarse, ctx.d_coarse, lp, ls, ctx.optimizer);
                c.point.valid_error = validation_error(c.op.matrix, valid, ctx.solver);
                c.usable = true;
            } catch (const NumericalError&) {
                c.point.valid_error = kInf;
            }
        }
    }
    return pick_best(std::move(candidates), route_name(route));
}

SweepResult convergence_sweep(const Grid& fine, const FineDataset& train, const FineDataset& valid,
                              const FineDataset& test, const SweepRequest& req) {
    if (req.m_values.empty()) throw ValidationError("convergence_sweep: no M values");
    if (!std::is_sorted(req.m_values.begin(), req.m_values.end()))
        throw ValidationError("convergence_sweep: M values must be ascending");

    SweepResult result;
    result.m_values = req.m_values;
    const CirculantOperator a_fine = convection_operator(fine);

    for (FilterKind kind : req.filters) {
        FilterSpec spec = req.filter_spec;
        spec.kind = kind;
        for (int m : req.m_values) {
            const Grid coarse = make_grid(m);
            const FilterMatrix filter = build_filter_matrix(spec, coarse, fine);
            const Matrix a_coarse = convection_operator(coarse).dense();
            const Matrix d_coarse = diffusion_operator(coarse).dense();

            // Filtering is cheap relative to the fine solves, so the fine
            // datasets are shared across every (filter, M) cell. Only the
            // train set keeps its fine matrices (the intrusive fit needs U).
            FineDataset train_copy{train.U, train.Udot, train.times, train.n_ic, train.n_t};
            const SnapshotSet train_set = make_snapshot_set(filter, std::move(train_copy));
            const SnapshotSet valid_set = filtered_snapshot_set(filter, valid);
            const SnapshotSet test_set = filtered_snapshot_set(filter, test);

            FitContext ctx;
            ctx.filter = &filter;
            ctx.a_fine = &a_fine;
            ctx.a_coarse = a_coarse;
            ctx.d_coarse = d_coarse;
            ctx.solver = req.solver;
            ctx.optimizer = req.optimizer;

            for (const std::string& route : req.routes) {
                SweepCell cell;
                cell.filter = filter_name(kind);
                cell.route = route;
                cell.m = m;
                try {
                    if (route == "baseline") {
                        cell.avg_error = time_averaged_error(error_curve(a_coarse, test_set, req.solver));
                    } else {
                        const Route r = parse_route(route);
                        const auto& grid =
                            r == Route::Embedded ? req.embedded_lambda_grid : req.lambda_grid;
                        GridSearchResult fit = grid_search(r, train_set, valid_set, grid, ctx);
                        cell.lambda_prior = r == Route::Intrusive ? fit.best.lambda
                                                                  : fit.best.lambda_prior;
                        cell.lambda_stab = fit.best.lambda_stab;
                        cell.avg_error =
                            time_averaged_error(error_curve(fit.best.matrix, test_set, req.solver));
                    }
                } catch (const std::exception& e) {
                    cell.avg_error = kInf;
                    cell.message = e.what();
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }
    return result;
}

std::vector<ErrorCurve> long_horizon_study(const std::vector<std::pair<std::string, Matrix>>& ops,
                                           const SnapshotSet& long_set, const SolverConfig& cfg) {
    std::vector<ErrorCurve> curves;
    curves.reserve(ops.size());
    for (const auto& [label, matrix] : ops) {
        ErrorCurve curve = error_curve(matrix, long_set, cfg);
        curve.route = label;
        curve.dataset = "long";
        curves.push_back(std::move(curve));
    }
    return curves;
}

}  // namespace filtop
