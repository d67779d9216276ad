#include "filtop/adjoint.hpp"

#include "filtop/errors.hpp"

#include <cmath>
#include <string>

namespace filtop::adjoint {

namespace {

struct StageInputs {
    Vector y1, y2, y3, y4;  // states each k_i = op * y_i is evaluated at
};

struct Rk4Work {
    Vector k1, k2, k3, k4, y2, y3, y4;

    explicit Rk4Work(Eigen::Index m) : k1(m), k2(m), k3(m), k4(m), y2(m), y3(m), y4(m) {}
};

// One classical RK4 step. Used by both the forward sweep and the segment
// recomputation in the reverse sweep; keeping a single code path makes the
// recomputed states bit-identical.
void rk4_step(const Matrix& op, const Vector& u, double dt, Vector& out, Rk4Work& w) {
    const double half = 0.5 * dt;
    w.k1.noalias() = op * u;
    w.y2 = u + half * w.k1;
    w.k2.noalias() = op * w.y2;
    w.y3 = u + half * w.k2;
    w.k3.noalias() = op * w.y3;
    w.y4 = u + dt * w.k3;
    w.k4.noalias() = op * w.y4;
    out = u + (dt / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

void validate(const Matrix& op, const Vector& u0, double t, int n_steps) {
    if (op.rows() != op.cols()) throw ValidationError("adjoint: operator must be square");
    if (op.rows() != u0.size()) throw ValidationError("adjoint: operator/state size mismatch");
    if (n_steps < 1) throw ValidationError("adjoint: n_steps must be >= 1");
    if (t < 0.0) throw ValidationError("adjoint: t must be >= 0");
}

int default_stride(int n_steps) {
    const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_steps))));
    return std::max(1, s);
}

}  // namespace

ForwardResult forward(const Matrix& op, const Vector& u0, double t, int n_steps, int stride) {
    validate(op, u0, t, n_steps);
    if (stride <= 0) stride = default_stride(n_steps);

    ForwardResult res;
    res.dt = t / n_steps;
    res.n_steps = n_steps;
    res.tape.stride = stride;
    res.tape.stored_states.emplace_back(0, u0);

    Rk4Work work(u0.size());
    Vector u = u0, next(u0.size());
    for (int s = 0; s < n_steps; ++s) {
        rk4_step(op, u, res.dt, next, work);
        u.swap(next);
        if (!u.allFinite())
            throw NumericalError("adjoint forward: non-finite state after step " + std::to_string(s + 1));
        if ((s + 1) % stride == 0 && s + 1 < n_steps)
            res.tape.stored_states.emplace_back(s + 1, u);
    }
    res.state = std::move(u);
    return res;
}

LossGradient gradient(const Matrix& op, const Vector& u0, double t, int n_steps,
                      const Vector& target, int stride) {
    validate(op, u0, t, n_steps);
    if (target.size() != u0.size()) throw ValidationError("adjoint: target/state size mismatch");

    ForwardResult fwd = forward(op, u0, t, n_steps, stride);
    const double dt = fwd.dt;
    const auto m = op.rows();

    LossGradient out;
    Vector residual = fwd.state - target;
    out.loss = residual.squaredNorm();
    out.state = std::move(fwd.state);
    out.grad = Matrix::Zero(m, m);

    Vector ubar = 2.0 * residual;  // d loss / d u(t)
    Rk4Work work(m);
    Vector k1b(m), k2b(m), k3b(m), k4b(m), y1b(m), y2b(m), y3b(m), y4b(m);
    std::vector<StageInputs> segment;

    // Walk checkpoints from the last one back to step 0. For each segment,
    // recompute the forward stage states, then run the adjoint recursion
    // through the steps in reverse.
    const auto& stored = fwd.tape.stored_states;
    int seg_end = n_steps;
    for (auto it = stored.rbegin(); it != stored.rend(); ++it) {
        const int seg_begin = it->first;
        const int len = seg_end - seg_begin;
        if (static_cast<int>(segment.size()) < len) segment.resize(static_cast<size_t>(len));

        Vector u = it->second, next(m);
        for (int s = 0; s < len; ++s) {
            StageInputs& st = segment[static_cast<size_t>(s)];
            st.y1 = u;
            rk4_step(op, u, dt, next, work);
            st.y2 = work.y2;
            st.y3 = work.y3;
            st.y4 = work.y4;
            u.swap(next);
        }

        for (int s = len - 1; s >= 0; --s) {
            const StageInputs& st = segment[static_cast<size_t>(s)];
            k4b = (dt / 6.0) * ubar;
            out.grad.noalias() += k4b * st.y4.transpose();
            y4b.noalias() = op.transpose() * k4b;

            k3b = (dt / 3.0) * ubar + dt * y4b;
            out.grad.noalias() += k3b * st.y3.transpose();
            y3b.noalias() = op.transpose() * k3b;

            k2b = (dt / 3.0) * ubar + (0.5 * dt) * y3b;
            out.grad.noalias() += k2b * st.y2.transpose();
            y2b.noalias() = op.transpose() * k2b;

            k1b = (dt / 6.0) * ubar + (0.5 * dt) * y2b;
            out.grad.noalias() += k1b * st.y1.transpose();
            y1b.noalias() = op.transpose() * k1b;

            ubar += y1b + y2b + y3b + y4b;
        }
        seg_end = seg_begin;

        if (!ubar.allFinite())
            throw NumericalError("adjoint reverse: non-finite adjoint state at step " +
                                 std::to_string(seg_end));
    }
    return out;
}

}  // namespace filtop::adjoint
