#pragma once

#include <vector>

namespace filtop {

/// Uniform periodic discretization of [0, 1): points x_n = n/N for n = 1..N,
/// so the last point is 1, which is identified with 0.
struct Grid {
    int n_points = 0;
    double spacing = 0.0;
    std::vector<double> points;

    double point(int i) const { return points[static_cast<size_t>(i)]; }
};

/// Builds a periodic grid with N points. N must be at least 7 so the widest
/// (seven-point) stencil fits without self-overlap.
Grid make_grid(int n_points);

}  // namespace filtop
