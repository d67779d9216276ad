#include "filtop/grid.hpp"

#include "filtop/errors.hpp"

#include <string>

namespace filtop {

Grid make_grid(int n_points) {
    if (n_points < 7)
        throw ValidationError("make_grid: need at least 7 points, got " + std::to_string(n_points));
    Grid g;
    g.n_points = n_points;
    g.spacing = 1.0 / n_points;
    g.points.resize(static_cast<size_t>(n_points));
    for (int n = 1; n <= n_points; ++n)
        g.points[static_cast<size_t>(n - 1)] = static_cast<double>(n) / n_points;
    return g;
}

}  // namespace filtop
