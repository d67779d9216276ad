#pragma once

#include "filtop/types.hpp"

#include <utility>
#include <vector>

namespace filtop::adjoint {

/// States stored along the forward RK4 sweep, every `stride` steps. Segments
/// between checkpoints are recomputed during the reverse sweep with the same
/// step routine, so recomputed states are bit-identical to the originals.
struct TapeCheckpoint {
    int stride = 1;
    std::vector<std::pair<int, Vector>> stored_states;  // (step index, state); step 0 always kept
};

struct ForwardResult {
    Vector state;
    TapeCheckpoint tape;
    double dt = 0.0;
    int n_steps = 0;
};

/// Classical RK4 solve of du/dt = op u from u(0) = u0 to time t with n_steps
/// equal steps. stride = 0 picks round(sqrt(n_steps)).
ForwardResult forward(const Matrix& op, const Vector& u0, double t, int n_steps, int stride = 0);

struct LossGradient {
    double loss = 0.0;
    Matrix grad;  // d loss / d op
    Vector state;
};

/// Squared-distance loss ||S(op, u0, t) - target||^2 and its exact derivative
/// with respect to every entry of op, via a reverse sweep through the RK4
/// stages. The per-stage Jacobian contribution enters as an outer product of
/// the adjoint stage vector with the forward stage state, so no M x M x M
/// tensor is ever formed. Memory follows the checkpoint stride; gradients are
/// independent of it.
LossGradient gradient(const Matrix& op, const Vector& u0, double t, int n_steps,
                      const Vector& target, int stride = 0);

}  // namespace filtop::adjoint
