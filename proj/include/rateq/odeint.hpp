#ifndef RATEQ_ODEINT_HPP
#define RATEQ_ODEINT_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "canonical.hpp"

namespace rateq {

/// Linear ODE system dy/dt = A y + c with sparse rows, one variable per
/// observable key. <empty>-terms land in the constant part.
struct OdeProblem {
    std::vector<CanonicalKey> vars;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows; // A, row-sparse
    std::vector<double> constants;                                 // c
    std::vector<double> y0;
    double t_end = 1.0;
    double dt = 1e-3;

    void check() const {
        if (!(dt > 0)) throw std::invalid_argument("ode problem: dt must be positive");
        if (rows.size() != vars.size() || constants.size() != vars.size() || y0.size() != vars.size())
            throw std::invalid_argument("ode problem: inconsistent dimensions");
        for (auto& row : rows)
            for (auto& [j, c] : row)
                if (j >= vars.size()) throw std::invalid_argument("ode problem: column out of range");
    }

    void derivative(const std::vector<double>& y, std::vector<double>& dy) const {
        for (std::size_t i = 0; i < y.size(); ++i) {
            double v = constants[i];
            for (auto& [j, a] : rows[i]) v += a * y[j];
            dy[i] = v;
        }
    }
};

namespace detail {

/// One classic fixed-step fourth-order step for dy/dt = f(y).
template <class Deriv>
void rk4_step(const Deriv& f, std::vector<double>& y, double dt,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = y.size();
    f(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace detail

struct Series {
    std::vector<double> times;
    std::vector<std::vector<double>> values; // one vector per time
};

/// Fixed-step RK4 from 0 to t_end; reports every step to the sink (including
/// the initial state). Non-finite values abort with the offending time.
inline void integrate(const OdeProblem& p,
                      const std::function<void(double, const std::vector<double>&)>& sink) {
    p.check();
    std::vector<double> y = p.y0, k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    auto f = [&](const std::vector<double>& yy, std::vector<double>& dy) { p.derivative(yy, dy); };
    double t = 0;
    sink(t, y);
    std::size_t steps = std::size_t(std::ceil(p.t_end / p.dt - 1e-12));
    for (std::size_t s = 0; s < steps; ++s) {
        double step = std::min(p.dt, p.t_end - t);
        detail::rk4_step(f, y, step, k1, k2, k3, k4, tmp);
        t += step;
        for (double v : y)
            if (!std::isfinite(v))
                throw std::runtime_error("integration diverged at t = " + std::to_string(t));
        sink(t, y);
    }
}

inline Series integrate(const OdeProblem& p) {
    Series out;
    integrate(p, [&](double t, const std::vector<double>& y) {
        out.times.push_back(t);
        out.values.push_back(y);
    });
    return out;
}

struct SteadyResult {
    std::vector<double> values;
    bool converged = false;
    double t_converged = 0;
};

/// Integrates until the relative per-step change stays below tol for a whole
/// window of steps, or t_max is reached (reported as not converged).
inline SteadyResult steady_state(const OdeProblem& p, double tol = 1e-9,
                                 std::size_t window = 100, double t_max = 1e4) {
    if (!(tol > 0)) throw std::invalid_argument("steady_state: tol must be positive");
    OdeProblem q = p;
    q.check();
    std::vector<double> y = q.y0, prev = y;
    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    auto f = [&](const std::vector<double>& yy, std::vector<double>& dy) { q.derivative(yy, dy); };
    double t = 0;
    std::size_t quiet = 0;
    while (t < t_max) {
        prev = y;
        detail::rk4_step(f, y, q.dt, k1, k2, k3, k4, tmp);
        t += q.dt;
        double rel = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!std::isfinite(y[i]))
                throw std::runtime_error("integration diverged at t = " + std::to_string(t));
            double scale = std::max(1.0, std::abs(y[i]));
            rel = std::max(rel, std::abs(y[i] - prev[i]) / scale);
        }
        quiet = rel < tol ? quiet + 1 : 0;
        if (quiet >= window) return SteadyResult{y, true, t};
    }
    return SteadyResult{y, false, t};
}

} // namespace rateq

#endif
