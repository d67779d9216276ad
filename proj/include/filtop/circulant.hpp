#pragma once

#include "filtop/grid.hpp"
#include "filtop/types.hpp"

#include <vector>

namespace filtop {

/// Periodic constant-stencil finite-difference operator. The dense form puts
/// scale * stencil[alpha + i] on the i-th periodically extended superdiagonal,
/// i in [-alpha, alpha]. Stencil entries are kept as exact integers (stored in
/// doubles) and the rational prefactor is applied once per output entry.
///
/// Immutable after construction; safe to share across threads.
struct CirculantOperator {
    int size = 0;
    std::vector<double> stencil;  // odd length: s_{-alpha} .. s_{alpha}
    double scale = 1.0;

    int half_width() const { return (static_cast<int>(stencil.size()) - 1) / 2; }

    /// out_r = scale * sum_i s_i * v_{(r+i) mod size}
    void apply(const Vector& v, Vector& out) const;
    Vector apply(const Vector& v) const;

    /// Column-wise apply for a block of states.
    void apply_block(const Matrix& v, Matrix& out) const;
    Matrix apply_block(const Matrix& v) const;

    /// Materializes the full dense matrix.
    Matrix dense() const;
};

/// Sixth-order central-difference discretization of -d/dx on a periodic grid:
/// (1/(60 dx)) circ(1, -9, 45, 0, -45, 9, -1). Antisymmetric, zero row sums.
CirculantOperator convection_operator(const Grid& grid);

/// Sixth-order discretization of d^2/dx^2 on a periodic grid:
/// (1/(180 dx^2)) circ(2, -27, 270, -490, 270, -27, 2). Symmetric, zero row
/// sums, spectrum on the non-positive real axis.
CirculantOperator diffusion_operator(const Grid& grid);

}  // namespace filtop
