#include "filtop/ode.hpp"

#include "filtop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace filtop {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th-order weights and the embedded 4th-order ones.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

void validate_times(std::span<const double> t_out) {
    if (t_out.empty()) throw ValidationError("solve_ode: no output times requested");
    if (t_out.front() < 0.0) throw ValidationError("solve_ode: output times must start at >= 0");
    for (size_t i = 1; i < t_out.size(); ++i)
        if (t_out[i] < t_out[i - 1])
            throw ValidationError("solve_ode: output times must be non-decreasing");
}

// Scaled RMS norm of the error estimate, per Hairer-Norsett-Wanner.
double error_norm(const Matrix& err, const Matrix& y_old, const Matrix& y_new,
                  double abs_tol, double rel_tol) {
    double acc = 0.0;
    const Eigen::Index n = err.size();
    const double* e = err.data();
    const double* a = y_old.data();
    const double* b = y_new.data();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = abs_tol + rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
        const double q = e[i] / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

// Initial step heuristic (Hairer's hinit, simplified to the autonomous case).
double initial_step(const OdeRhs& rhs, const Matrix& y0, const Matrix& f0, double t_span,
                    double abs_tol, double rel_tol) {
    const auto scnorm = [&](const Matrix& v, const Matrix& ref) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::abs(ref.data()[i]);
            const double q = v.data()[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(v.size()));
    };
    const double d0 = scnorm(y0, y0);
    const double d1 = scnorm(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_span);

    Matrix y1 = y0 + h0 * f0;
    Matrix f1(y0.rows(), y0.cols());
    rhs(y1, f1);
    const double d2 = scnorm(Matrix(f1 - f0), y0) / h0;

    const double d_max = std::max(d1, d2);
    double h1 = d_max <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                               : std::pow(0.01 / d_max, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, t_span});
}

class AdaptiveDopri {
public:
    AdaptiveDopri(const OdeRhs& rhs, const Matrix& y0, const SolverConfig& cfg)
        : rhs_(rhs), cfg_(cfg), y_(y0) {
        const auto rows = y0.rows();
        const auto cols = y0.cols();
        for (Matrix* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &yerr_})
            m->resize(rows, cols);
        rhs_(y_, k1_);
    }

    const Matrix& state() const { return y_; }
    double time() const { return t_; }
    long steps_taken() const { return n_attempts_; }

    /// Advances to t_target exactly. Returns false on failure (see status).
    bool advance_to(double t_target, OdeStatus& status) {
        if (t_target <= t_) return true;
        if (h_ <= 0.0) h_ = initial_step(rhs_, y_, k1_, t_target - t_, cfg_.abs_tol, cfg_.rel_tol);

        while (t_ < t_target) {
            if (n_attempts_ >= cfg_.max_steps) {
                fail(status, "step budget exhausted (max_steps = " + std::to_string(cfg_.max_steps) + ")");
                return false;
            }
            double h = h_;
            bool lands_on_target = false;
            if (t_ + h >= t_target) {
                h = t_target - t_;
                lands_on_target = true;
            }
            if (!(t_ + h > t_)) {
                fail(status, "step size underflow");
                return false;
            }
            ++n_attempts_;

            const double err = try_step(h);
            if (!std::isfinite(err)) {
                // Overflow inside the stages; retry smaller until underflow.
                h_ = 0.1 * h;
                continue;
            }
            if (err <= 1.0) {
                t_ = lands_on_target ? t_target : t_ + h;
                y_.swap(ynew_);
                k1_.swap(k7_);  // FSAL
                if (!y_.allFinite()) {
                    fail(status, "non-finite state");
                    return false;
                }
                const double fac11 = std::pow(err, kExpo);
                double fac = fac11 / std::pow(facold_, kBeta);
                fac = std::max(kInvFacMax, std::min(kInvFacMin, fac / kSafety));
                h_ = h / fac;
                facold_ = std::max(err, 1e-4);
            } else {
                h_ = h / std::min(kInvFacMin, fac11_reject(err));
            }
        }
        return true;
    }

private:
    static constexpr double kBeta = 0.04;             // PI stabilization
    static constexpr double kExpo = 0.2 - kBeta * 0.75;
    static constexpr double kSafety = 0.9;
    static constexpr double kInvFacMax = 0.1;         // at most 10x growth
    static constexpr double kInvFacMin = 5.0;         // at most 5x shrink

    static double fac11_reject(double err) { return std::pow(err, 0.2) / kSafety; }

    // One attempted step of size h; returns the scaled error norm.
    double try_step(double h) {
        ytmp_ = y_ + h * a21 * k1_;
        rhs_(ytmp_, k2_);
        ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(ytmp_, k3_);
        ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(ytmp_, k4_);
        ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(ytmp_, k5_);
        ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(ytmp_, k6_);
        ynew_ = y_ + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs_(ynew_, k7_);
        yerr_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        return error_norm(yerr_, y_, ynew_, cfg_.abs_tol, cfg_.rel_tol);
    }

    void fail(OdeStatus& status, const std::string& why) {
        status.ok = false;
        status.failure_time = t_;
        status.message = why + " at t = " + std::to_string(t_);
    }

    const OdeRhs& rhs_;
    const SolverConfig& cfg_;
    Matrix y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yerr_;
    double t_ = 0.0;
    double h_ = 0.0;
    double facold_ = 1e-4;
    long n_attempts_ = 0;
};

OdeSolution solve_fixed_rk4(const OdeRhs& rhs, const Matrix& u0, std::span<const double> t_out,
                            const SolverConfig& cfg) {
    OdeSolution sol;
    sol.states.reserve(t_out.size());
    if (cfg.rk4_steps_per_interval < 1)
        throw ValidationError("solve_ode: rk4_steps_per_interval must be >= 1");

    Matrix y = u0;
    Matrix k1(u0.rows(), u0.cols()), k2 = k1, k3 = k1, k4 = k1, ytmp = k1;
    double t = 0.0;
    long attempts = 0;
    for (size_t j = 0; j < t_out.size(); ++j) {
        const double target = t_out[j];
        const int n_steps = target > t ? cfg.rk4_steps_per_interval : 0;
        const double h = n_steps > 0 ? (target - t) / n_steps : 0.0;
        for (int s = 0; s < n_steps; ++s) {
            if (++attempts > cfg.max_steps) {
                sol.status.ok = false;
                sol.status.last_valid_output = static_cast<int>(j) - 1;
                sol.status.failure_time = t;
                sol.status.message = "step budget exhausted at t = " + std::to_string(t);
                return sol;
            }
            rhs(y, k1);
            ytmp = y + (0.5 * h) * k1;
            rhs(ytmp, k2);
            ytmp = y + (0.5 * h) * k2;
            rhs(ytmp, k3);
            ytmp = y + h * k3;
            rhs(ytmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        t = target;
        if (!y.allFinite()) {
            sol.status.ok = false;
            sol.status.last_valid_output = static_cast<int>(j) - 1;
            sol.status.failure_time = t;
            sol.status.message = "non-finite state at t = " + std::to_string(t);
            return sol;
        }
        sol.states.push_back(y);
        sol.status.last_valid_output = static_cast<int>(j);
    }
    return sol;
}

}  // namespace

OdeSolution solve_ode(const OdeRhs& rhs, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg) {
    validate_times(t_out);
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
        throw ValidationError("solve_ode: tolerances must be positive");
    if (cfg.max_steps <= 0) throw ValidationError("solve_ode: max_steps must be positive");

    if (cfg.method == OdeMethod::FixedRK4) return solve_fixed_rk4(rhs, u0, t_out, cfg);

    OdeSolution sol;
    sol.states.reserve(t_out.size());
    AdaptiveDopri stepper(rhs, u0, cfg);
    for (size_t j = 0; j < t_out.size(); ++j) {
        if (!stepper.advance_to(t_out[j], sol.status)) {
            sol.status.last_valid_output = static_cast<int>(j) - 1;
            return sol;
        }
        sol.states.push_back(stepper.state());
        sol.status.last_valid_output = static_cast<int>(j);
    }
    return sol;
}

OdeSolution solve_ode(const CirculantOperator& op, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg) {
    return solve_ode([&op](const Matrix& y, Matrix& dy) { op.apply_block(y, dy); }, u0, t_out, cfg);
}

OdeSolution solve_ode(const Matrix& op, const Matrix& u0, std::span<const double> t_out,
                      const SolverConfig& cfg) {
    if (op.rows() != op.cols() || op.rows() != u0.rows())
        throw ValidationError("solve_ode: operator/state dimension mismatch");
    return solve_ode([&op](const Matrix& y, Matrix& dy) { dy.noalias() = op * y; }, u0, t_out, cfg);
}

}  // namespace filtop
