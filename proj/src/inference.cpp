#include "filtop/inference.hpp"

#include "filtop/adjoint.hpp"
#include "filtop/errors.hpp"
#include "filtop/parallel.hpp"
#include "filtop/rng.hpp"

#include <cmath>
#include <string>

namespace filtop {

namespace {

// Residual guard for the closed-form solves: the normal equations must hold
// to near machine precision relative to the right-hand side.
constexpr double kNormalEquationTol = 1e-8;

// Solves X * lhs = rhs for X (row-wise), with lhs symmetric positive
// (semi-)definite. Throws NumericalError if lhs is numerically singular or
// the residual check fails.
Matrix solve_right(const Matrix& lhs, const Matrix& rhs, const std::string& what) {
    Eigen::LDLT<Matrix> ldlt(lhs);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError(what + ": Gram matrix factorization failed (singular system?)");
    Matrix x_t = ldlt.solve(rhs.transpose());
    Matrix x = x_t.transpose();
    const double scale = rhs.norm();
    const double residual = (x * lhs - rhs).norm();
    if (!(residual <= kNormalEquationTol * (scale > 0.0 ? scale : 1.0)))
        throw NumericalError(what + ": normal-equation residual " + std::to_string(residual) +
                             " exceeds tolerance (ill-conditioned or singular system)");
    return x;
}

}  // namespace

const char* route_name(Route route) {
    switch (route) {
        case Route::Intrusive: return "intrusive";
        case Route::DerivativeFit: return "df";
        case Route::Embedded: return "emb";
    }
    return "?";
}

Route parse_route(const std::string& name) {
    if (name == "intrusive" || name == "int") return Route::Intrusive;
    if (name == "df" || name == "derivative-fit") return Route::DerivativeFit;
    if (name == "emb" || name == "embedded") return Route::Embedded;
    throw ValidationError("unknown route '" + name + "' (expected intrusive, df or emb)");
}

std::vector<double> RegularizationConfig::default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(13);
    for (int e = -12; e <= 0; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

Matrix fit_reconstruction_from_grams(const Matrix& gram, const Matrix& cross, Eigen::Index d,
                                     double lambda) {
    if (lambda < 0.0) throw ValidationError("fit_reconstruction: lambda must be >= 0");
    if (d < 1) throw ValidationError("fit_reconstruction: need at least one snapshot");
    Matrix lhs = gram;
    lhs.diagonal().array() += static_cast<double>(d) * lambda;
    return solve_right(lhs, cross, "fit_reconstruction");
}

Matrix fit_reconstruction(const Matrix& Ubar, const Matrix& U, double lambda) {
    if (Ubar.cols() != U.cols())
        throw ValidationError("fit_reconstruction: snapshot counts disagree");
    const Matrix gram = Ubar * Ubar.transpose();
    const Matrix cross = U * Ubar.transpose();
    return fit_reconstruction_from_grams(gram, cross, Ubar.cols(), lambda);
}

InferredOperator intrusive_operator(const FilterMatrix& filter, const CirculantOperator& a_fine,
                                    const Matrix& reconstruction) {
    if (a_fine.size != filter.cols())
        throw ValidationError("intrusive_operator: fine operator does not match the filter");
    if (reconstruction.rows() != filter.cols() || reconstruction.cols() != filter.rows())
        throw ValidationError("intrusive_operator: reconstruction must be N x M");
    InferredOperator op;
    op.route = Route::Intrusive;
    op.matrix = filter.weights * a_fine.apply_block(reconstruction);
    return op;
}

InferredOperator fit_derivative_from_grams(const Matrix& gram, const Matrix& cross,
                                           const Matrix& a_coarse, const Matrix& d_coarse,
                                           double lambda_prior, double lambda_stab) {
    if (lambda_prior < 0.0 || lambda_stab < 0.0)
        throw ValidationError("fit_derivative: regularization weights must be >= 0");
    Matrix lhs = gram;
    lhs.diagonal().array() += lambda_prior + lambda_stab;
    Matrix rhs = cross + lambda_prior * a_coarse + lambda_stab * d_coarse;
    InferredOperator op;
    op.route = Route::DerivativeFit;
    op.lambda_prior = lambda_prior;
    op.lambda_stab = lambda_stab;
    op.matrix = solve_right(lhs, rhs, "fit_derivative");
    return op;
}

InferredOperator fit_derivative(const Matrix& Ubar, const Matrix& Ubar_dot, const Matrix& a_coarse,
                                const Matrix& d_coarse, double lambda_prior, double lambda_stab) {
    if (Ubar.cols() != Ubar_dot.cols() || Ubar.rows() != Ubar_dot.rows())
        throw ValidationError("fit_derivative: snapshot shapes disagree");
    if (a_coarse.rows() != Ubar.rows() || d_coarse.rows() != Ubar.rows())
        throw ValidationError("fit_derivative: coarse operators do not match snapshot rows");
    const double inv_d = 1.0 / static_cast<double>(Ubar.cols());
    const Matrix gram = inv_d * (Ubar * Ubar.transpose());
    const Matrix cross = inv_d * (Ubar_dot * Ubar.transpose());
    return fit_derivative_from_grams(gram, cross, a_coarse, d_coarse, lambda_prior, lambda_stab);
}

InferredOperator fit_embedded(const SnapshotSet& train, const Matrix& a_coarse,
                              const Matrix& d_coarse, double lambda_prior, double lambda_stab,
                              const OptimizerConfig& opt) {
    const auto m = a_coarse.rows();
    if (a_coarse.cols() != m || d_coarse.rows() != m || d_coarse.cols() != m)
        throw ValidationError("fit_embedded: coarse operators must be square and equal-sized");
    if (train.Ubar.rows() != m)
        throw ValidationError("fit_embedded: snapshots do not match the coarse operators");
    if (train.n_ic < 1 || train.n_t < 1 || train.Ubar.cols() != train.columns())
        throw ValidationError("fit_embedded: inconsistent snapshot layout");
    if (lambda_prior < 0.0 || lambda_stab < 0.0)
        throw ValidationError("fit_embedded: regularization weights must be >= 0");
    if (opt.iterations < 0 || opt.batch_size < 1 || !(opt.step_size > 0.0))
        throw ValidationError("fit_embedded: bad optimizer settings");
    // Every trajectory must start at its own filtered initial state.
    for (int ic = 0; ic < train.n_ic; ++ic) {
        if (train.times[static_cast<size_t>(train.column(ic, 0))] != 0.0)
            throw ValidationError("fit_embedded: trajectory " + std::to_string(ic) +
                                  " does not start at t = 0");
        for (int j = 1; j < train.n_t; ++j)
            if (train.times[static_cast<size_t>(train.column(ic, j))] <
                train.times[static_cast<size_t>(train.column(ic, j - 1))])
                throw ValidationError("fit_embedded: trajectory " + std::to_string(ic) +
                                      " has decreasing time stamps");
    }

    const int steps_per_unit = opt.steps_per_unit_time > 0 ? opt.steps_per_unit_time
                                                           : 4 * static_cast<int>(m);
    const int batch = opt.batch_size;

    InferredOperator result;
    result.route = Route::Embedded;
    result.lambda_prior = lambda_prior;
    result.lambda_stab = lambda_stab;
    result.training_loss.reserve(static_cast<size_t>(opt.iterations));

    Matrix abar = a_coarse;  // initial guess
    Matrix m1 = Matrix::Zero(m, m);  // first ADAM moment
    Matrix m2 = Matrix::Zero(m, m);  // second ADAM moment

    std::vector<Matrix> sample_grads(static_cast<size_t>(batch));
    std::vector<double> sample_losses(static_cast<size_t>(batch));
    std::vector<std::pair<int, int>> picks(static_cast<size_t>(batch));  // (ic, time index)

    for (int it = 1; it <= opt.iterations; ++it) {
        RandomStream rng(stream_key(opt.seed, hash_name("embedded-batch"),
                                    static_cast<std::uint64_t>(it)));
        for (int b = 0; b < batch; ++b) {
            picks[static_cast<size_t>(b)] = {
                static_cast<int>(rng.below(static_cast<std::uint64_t>(train.n_ic))),
                static_cast<int>(rng.below(static_cast<std::uint64_t>(train.n_t)))};
        }

        parallel_for(0, batch, [&](int b) {
            const auto [ic, j] = picks[static_cast<size_t>(b)];
            const int col0 = train.column(ic, 0);
            const int col = train.column(ic, j);
            const double t = train.times[static_cast<size_t>(col)];
            const int n_steps = std::max(1, static_cast<int>(std::ceil(t * steps_per_unit)));
            auto lg = adjoint::gradient(abar, train.Ubar.col(col0), t, n_steps,
                                        train.Ubar.col(col));
            sample_losses[static_cast<size_t>(b)] = lg.loss;
            sample_grads[static_cast<size_t>(b)] = std::move(lg.grad);
        });

        // Fixed-order pairwise reduction keeps the sum independent of the
        // parallel schedule above.
        for (int width = 1; width < batch; width *= 2) {
            for (int b = 0; b + width < batch; b += 2 * width) {
                sample_grads[static_cast<size_t>(b)] += sample_grads[static_cast<size_t>(b + width)];
                sample_losses[static_cast<size_t>(b)] += sample_losses[static_cast<size_t>(b + width)];
            }
        }

        const double inv_batch = 1.0 / batch;
        Matrix grad = inv_batch * sample_grads[0];
        double loss = inv_batch * sample_losses[0];
        if (lambda_prior > 0.0) {
            grad.noalias() += 2.0 * lambda_prior * (abar - a_coarse);
            loss += lambda_prior * (abar - a_coarse).squaredNorm();
        }
        if (lambda_stab > 0.0) {
            grad.noalias() += 2.0 * lambda_stab * (abar - d_coarse);
            loss += lambda_stab * (abar - d_coarse).squaredNorm();
        }
        if (!std::isfinite(loss) || !grad.allFinite())
            throw NumericalError("fit_embedded: non-finite loss at iteration " + std::to_string(it));
        result.training_loss.push_back(loss);

        // ADAM update with bias correction.
        m1 = opt.beta1 * m1 + (1.0 - opt.beta1) * grad;
        m2.array() = opt.beta2 * m2.array() + (1.0 - opt.beta2) * grad.array().square();
        const double c1 = 1.0 - std::pow(opt.beta1, it);
        const double c2 = 1.0 - std::pow(opt.beta2, it);
        abar.array() -=
            opt.step_size * (m1.array() / c1) / ((m2.array() / c2).sqrt() + opt.eps_hat);
    }

    result.matrix = std::move(abar);
    return result;
}

double commutator_error(const Matrix& op, const Matrix& a_coarse) {
    if (op.rows() != a_coarse.rows() || op.cols() != a_coarse.cols())
        throw ValidationError("commutator_error: operator shapes disagree");
    return (op - a_coarse).norm() / a_coarse.norm();
}

}  // namespace filtop
