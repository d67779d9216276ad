#pragma once

#include "filtop/circulant.hpp"
#include "filtop/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace filtop {

enum class OdeMethod { AdaptiveRK, FixedRK4 };

struct SolverConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    long max_steps = 100000000;  // attempted steps per solve
    OdeMethod method = OdeMethod::AdaptiveRK;
    int rk4_steps_per_interval = 16;  // FixedRK4: steps between consecutive outputs
};

/// Outcome of one solve. Outputs with index <= last_valid_output hold states;
/// later requested outputs were not reached (instability or step budget).
struct OdeStatus {
    bool ok = true;
    int last_valid_output = -1;
    double failure_time = 0.0;
    std::string message;
};

struct OdeSolution {
    std::vector<Matrix> states;  // one size x n_cols block per output time
    OdeStatus status;
};

/// Right-hand side evaluated column-wise: derivs = f(states), same shape.
using OdeRhs = std::function<void(const Matrix&, Matrix&)>;

/// Integrates du/dt = rhs(u) for a block of initial columns, reporting states
/// at the requested output times. t_out must be non-decreasing and start at
/// >= 0; an output at t = 0 returns the initial columns exactly.
///
/// AdaptiveRK is an embedded Dormand-Prince 5(4) pair with PI step-size
/// control; steps are clamped to land exactly on each output time. FixedRK4
/// is classical RK4 with rk4_steps_per_interval equal steps per output gap.
///
/// Failures (non-finite state, step underflow, step budget) are reported in
/// the status rather than thrown, so callers can keep partial trajectories.
OdeSolution solve_ode(const OdeRhs& rhs, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg);

/// Convenience overloads: stencil-based fine operator / dense coarse operator.
OdeSolution solve_ode(const CirculantOperator& op, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg);
OdeSolution solve_ode(const Matrix& op, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg);

}  // namespace filtop
