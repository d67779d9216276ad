#pragma once

#include "filtop/grid.hpp"
#include "filtop/types.hpp"

namespace filtop {

enum class FilterKind { TopHat, Gaussian };

const char* filter_name(FilterKind kind);
FilterKind parse_filter_kind(const std::string& name);

/// Kernel filter with spatially varying radius
///   h(x) = (1 + radius_variation * sin(2 pi x)) * h0.
/// radius_variation = 0 gives a uniform (convolution-type) filter; the
/// default 1/3 makes the radius at x = 1/4 twice the radius at x = 3/4.
struct FilterSpec {
    FilterKind kind = FilterKind::TopHat;
    double h0 = 1.0 / 50.0;
    double radius_variation = 1.0 / 3.0;
    int periodic_images = 1;  // truncation z_max of the periodization sum
};

/// Filter radius h(x); positive for |radius_variation| < 1.
double radius(const FilterSpec& spec, double x);

/// Kernel value G(x, xi). The top-hat is 1/(2h(x)) on the closed interval
/// |xi - x| <= h(x); the Gaussian has standard deviation h(x)/sqrt(3).
/// Evaluated on the real line, without periodization.
double kernel(const FilterSpec& spec, double x, double xi);

/// M x N quadrature discretization of a kernel filter: row m holds the
/// periodized kernel sampled at the fine points, normalized to sum 1.
/// Rows are non-negative and row-stochastic by construction.
///
/// Immutable after construction; safe to share across threads.
struct FilterMatrix {
    Matrix weights;  // M x N
    Grid coarse;
    Grid fine;

    int rows() const { return static_cast<int>(weights.rows()); }
    int cols() const { return static_cast<int>(weights.cols()); }
};

/// Builds W_mn = Gp(x_m, xi_n) / sum_i Gp(x_m, xi_i) where Gp sums the kernel
/// over periodic images z in [-z_max, z_max]. Requires M <= N; rejects rows
/// whose pre-normalization sum vanishes (top-hat support narrower than the
/// fine spacing around an off-grid coarse point).
FilterMatrix build_filter_matrix(const FilterSpec& spec, const Grid& coarse, const Grid& fine);

/// Column-wise filtering of fine-grid snapshots: returns W * fine_states.
Matrix filter_snapshots(const FilterMatrix& filter, const Matrix& fine_states);

}  // namespace filtop
