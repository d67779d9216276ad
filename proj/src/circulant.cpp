#include "filtop/circulant.hpp"

#include "filtop/errors.hpp"

#include <string>

namespace filtop {

namespace {

void check_apply_dims(const CirculantOperator& op, Eigen::Index rows) {
    if (rows != op.size)
        throw ValidationError("circulant apply: vector length " + std::to_string(rows) +
                              " does not match operator size " + std::to_string(op.size));
    if (op.stencil.size() % 2 == 0 || op.stencil.empty())
        throw ValidationError("circulant apply: stencil length must be odd");
    if (static_cast<int>(op.stencil.size()) > op.size)
        throw ValidationError("circulant apply: stencil wider than operator size");
}

}  // namespace

void CirculantOperator::apply(const Vector& v, Vector& out) const {
    check_apply_dims(*this, v.size());
    const int n = size;
    const int alpha = half_width();
    out.resize(n);
    const double* s = stencil.data() + alpha;  // s[i] valid for i in [-alpha, alpha]
    const double* x = v.data();
    double* y = out.data();

    // Interior rows touch only in-range neighbours.
    for (int r = alpha; r < n - alpha; ++r) {
        double acc = 0.0;
        for (int i = -alpha; i <= alpha; ++i) acc += s[i] * x[r + i];
        y[r] = acc * scale;
    }
    // Wrapped rows at both ends.
    for (int r = 0; r < alpha; ++r) {
        double acc = 0.0;
        for (int i = -alpha; i <= alpha; ++i) {
            int j = r + i;
            if (j < 0) j += n;
            acc += s[i] * x[j];
        }
        y[r] = acc * scale;
    }
    for (int r = n - alpha; r < n; ++r) {
        double acc = 0.0;
        for (int i = -alpha; i <= alpha; ++i) {
            int j = r + i;
            if (j >= n) j -= n;
            acc += s[i] * x[j];
        }
        y[r] = acc * scale;
    }
}

Vector CirculantOperator::apply(const Vector& v) const {
    Vector out;
    apply(v, out);
    return out;
}

void CirculantOperator::apply_block(const Matrix& v, Matrix& out) const {
    check_apply_dims(*this, v.rows());
    out.resize(v.rows(), v.cols());
    Vector col(v.rows()), res(v.rows());
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        col = v.col(c);
        apply(col, res);
        out.col(c) = res;
    }
}

Matrix CirculantOperator::apply_block(const Matrix& v) const {
    Matrix out;
    apply_block(v, out);
    return out;
}

Matrix CirculantOperator::dense() const {
    const int n = size;
    const int alpha = half_width();
    Matrix m = Matrix::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        for (int i = -alpha; i <= alpha; ++i) {
            int c = (r + i) % n;
            if (c < 0) c += n;
            m(r, c) += scale * stencil[static_cast<size_t>(alpha + i)];
        }
    }
    return m;
}

CirculantOperator convection_operator(const Grid& grid) {
    CirculantOperator op;
    op.size = grid.n_points;
    op.stencil = {1.0, -9.0, 45.0, 0.0, -45.0, 9.0, -1.0};
    op.scale = 1.0 / (60.0 * grid.spacing);
    return op;
}

CirculantOperator diffusion_operator(const Grid& grid) {
    CirculantOperator op;
    op.size = grid.n_points;
    op.stencil = {2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0};
    op.scale = 1.0 / (180.0 * grid.spacing * grid.spacing);
    return op;
}

}  // namespace filtop
