#include "filtop/filter.hpp"

#include "filtop/errors.hpp"
#include "filtop/parallel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace filtop {

namespace {

// Entries this small are far below quadrature error; zeroing them keeps
// subnormals out of the row sums.
constexpr double kGaussianFloor = 1e-300;

void validate_spec(const FilterSpec& spec) {
    if (!(spec.h0 > 0.0))
        throw ValidationError("filter: h0 must be positive");
    if (!(std::abs(spec.radius_variation) < 1.0))
        throw ValidationError("filter: |radius_variation| must be < 1 so h(x) stays positive");
    if (spec.periodic_images < 1)
        throw ValidationError("filter: periodic_images (z_max) must be >= 1");
}

double kernel_at_radius(FilterKind kind, double h, double x, double xi) {
    const double r = xi - x;
    if (kind == FilterKind::TopHat) {
        return std::abs(r) <= h ? 1.0 / (2.0 * h) : 0.0;
    }
    const double value =
        std::sqrt(3.0 / (2.0 * std::numbers::pi * h * h)) * std::exp(-3.0 * r * r / (2.0 * h * h));
    return value < kGaussianFloor ? 0.0 : value;
}

}  // namespace

const char* filter_name(FilterKind kind) {
    return kind == FilterKind::TopHat ? "tophat" : "gaussian";
}

FilterKind parse_filter_kind(const std::string& name) {
    if (name == "tophat" || name == "top-hat") return FilterKind::TopHat;
    if (name == "gaussian") return FilterKind::Gaussian;
    throw ValidationError("unknown filter kind '" + name + "' (expected tophat or gaussian)");
}

double radius(const FilterSpec& spec, double x) {
    validate_spec(spec);
    return (1.0 + spec.radius_variation * std::sin(2.0 * std::numbers::pi * x)) * spec.h0;
}

double kernel(const FilterSpec& spec, double x, double xi) {
    return kernel_at_radius(spec.kind, radius(spec, x), x, xi);
}

FilterMatrix build_filter_matrix(const FilterSpec& spec, const Grid& coarse, const Grid& fine) {
    validate_spec(spec);
    const int m_coarse = coarse.n_points;
    const int n_fine = fine.n_points;
    if (m_coarse > n_fine)
        throw ValidationError("build_filter_matrix: coarse grid (" + std::to_string(m_coarse) +
                              ") must not be finer than the fine grid (" + std::to_string(n_fine) + ")");

    FilterMatrix result;
    result.coarse = coarse;
    result.fine = fine;
    result.weights.resize(m_coarse, n_fine);

    std::vector<char> row_empty(static_cast<size_t>(m_coarse), 0);

    parallel_for(0, m_coarse, [&](int m) {
        const double x = coarse.point(m);
        const double h = radius(spec, x);
        double sum = 0.0;
        for (int n = 0; n < n_fine; ++n) {
            const double xi = fine.point(n);
            double w = 0.0;
            for (int z = -spec.periodic_images; z <= spec.periodic_images; ++z)
                w += kernel_at_radius(spec.kind, h, x, xi + static_cast<double>(z));
            result.weights(m, n) = w;
            sum += w;
        }
        if (sum <= 0.0) {
            row_empty[static_cast<size_t>(m)] = 1;
            return;
        }
        result.weights.row(m) /= sum;
    });

    for (int m = 0; m < m_coarse; ++m) {
        if (row_empty[static_cast<size_t>(m)])
            throw ValidationError("build_filter_matrix: row " + std::to_string(m) +
                                  " has zero weight sum; filter support is narrower than the fine "
                                  "grid spacing at x = " + std::to_string(coarse.point(m)));
    }
    return result;
}

Matrix filter_snapshots(const FilterMatrix& filter, const Matrix& fine_states) {
    if (fine_states.rows() != filter.weights.cols())
        throw ValidationError("filter_snapshots: state rows " + std::to_string(fine_states.rows()) +
                              " do not match filter columns " + std::to_string(filter.weights.cols()));
    return filter.weights * fine_states;
}

}  // namespace filtop
