#pragma once

#include "filtop/circulant.hpp"
#include "filtop/dns.hpp"
#include "filtop/filter.hpp"
#include "filtop/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace filtop {

enum class Route { Intrusive, DerivativeFit, Embedded };

const char* route_name(Route route);
Route parse_route(const std::string& name);

/// Regularization weights and the candidate grid searched over them.
struct RegularizationConfig {
    double lambda = 0.0;        // ridge weight of the reconstruction fit
    double lambda_prior = 0.0;  // pull toward the coarse convection stencil
    double lambda_stab = 0.0;   // pull toward the coarse diffusion stencil
    std::vector<double> grid = default_lambda_grid();

    /// {1e-12, 1e-11, ..., 1e0}.
    static std::vector<double> default_lambda_grid();
};

/// Stochastic-gradient settings for the embedded route (ADAM).
struct OptimizerConfig {
    int iterations = 10000;
    double step_size = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    int batch_size = 32;
    std::uint64_t seed = 1;
    /// RK4 steps per unit time inside the embedded solve; 0 picks 4*M.
    int steps_per_unit_time = 0;
};

/// A coarse-grid operator produced by one of the inference routes.
struct InferredOperator {
    Matrix matrix;  // M x M
    Route route = Route::Intrusive;
    double lambda = 0.0;
    double lambda_prior = 0.0;
    double lambda_stab = 0.0;
    std::string provenance;
    std::vector<double> training_loss;  // embedded route only, one entry per iteration
};

/// Ridge-regression reconstruction N x M matrix
///   R = argmin (1/d) ||R Ubar - U||_F^2 + lambda ||R||_F^2
///     = U Ubar^T (Ubar Ubar^T + d lambda I)^{-1},
/// computed through a symmetric solve, never an explicit inverse. With
/// lambda = 0 the Gram matrix must be invertible.
Matrix fit_reconstruction(const Matrix& Ubar, const Matrix& U, double lambda);

/// Same closed form, from precomputed Grams: gram = Ubar Ubar^T (M x M),
/// cross = U Ubar^T (N x M). Used by the grid search to share the Grams.
Matrix fit_reconstruction_from_grams(const Matrix& gram, const Matrix& cross, Eigen::Index d,
                                     double lambda);

/// Assembles the intrusive operator W A R on the coarse grid.
InferredOperator intrusive_operator(const FilterMatrix& filter, const CirculantOperator& a_fine,
                                    const Matrix& reconstruction);

/// Closed-form derivative fit
///   argmin (1/d) ||Abar Ubar - Ubar_dot||_F^2
///        + lambda_prior ||Abar - A_M||_F^2 + lambda_stab ||Abar - D_M||_F^2.
InferredOperator fit_derivative(const Matrix& Ubar, const Matrix& Ubar_dot, const Matrix& a_coarse,
                                const Matrix& d_coarse, double lambda_prior, double lambda_stab);

/// Derivative-fit from precomputed Grams: gram = (1/d) Ubar Ubar^T,
/// cross = (1/d) Ubar_dot Ubar^T.
InferredOperator fit_derivative_from_grams(const Matrix& gram, const Matrix& cross,
                                           const Matrix& a_coarse, const Matrix& d_coarse,
                                           double lambda_prior, double lambda_stab);

/// Solver-in-the-loop fit: starting from A_M, minimizes
///   mean_batch ||S(Abar, ubar(0), t) - ubar(t)||^2
///        + lambda_prior ||Abar - A_M||_F^2 + lambda_stab ||Abar - D_M||_F^2
/// by ADAM, with exact gradients from the discrete adjoint. Each iteration
/// samples batch_size (trajectory, time) pairs uniformly with replacement.
/// Uses only the filtered part of the snapshots; trajectories must start at
/// t = 0. Training-loss history is recorded per iteration.
InferredOperator fit_embedded(const SnapshotSet& train, const Matrix& a_coarse,
                              const Matrix& d_coarse, double lambda_prior, double lambda_stab,
                              const OptimizerConfig& opt);

/// Relative coarse-grid commutator error ||Abar - A_M||_F / ||A_M||_F.
double commutator_error(const Matrix& op, const Matrix& a_coarse);

}  // namespace filtop
