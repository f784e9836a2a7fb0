#pragma once

// Mean-field reference model with delayed recruitment, integrated by
// fixed-step RK4 (method of steps). The delay must be a whole number of
// steps so the lagged tumor value sits on the stored grid; RK4 half-step
// stages read it through four-point Lagrange interpolation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tisim/model.hpp"

namespace tisim {

struct DdeInitial {
    double T0 = 1.0;
    double E0 = 0.0;
    double I0 = 0.0;
};

struct DdeSeries {
    std::vector<double> t;
    std::vector<double> T;
    std::vector<double> E;
    std::vector<double> I;

    std::size_t size() const { return t.size(); }
};

class DdeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tumor history for t < 0.
using DdeHistory = std::function<double(double)>;

inline double zero_history(double) { return 0.0; }

struct DdeRhs {
    double dT, dE, dI;
};

/// Right-hand side at (T, E, I) with lagged tumor value T_lag.
inline DdeRhs dde_rhs(const ModelParams& p, double T, double E, double I, double T_lag) {
    return DdeRhs{
        p.r * T * (1.0 - (p.b / p.V) * T) - p.p_T * T * E / (p.g_T * p.V + T),
        p.p_E * I * E / (p.g_E + I) - p.mu_E * E + p.c * T_lag,
        (p.p_I / p.V) * T * E / (p.g_I * p.V + T) - p.mu_I * I,
    };
}

namespace detail {

// Lagrange interpolation of grid values v[j0..j0+m) (unit spacing) at x.
inline double lagrange_on_grid(const std::vector<double>& v, std::size_t j0, std::size_t m,
                               double x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double w = 1.0;
        const auto xi = static_cast<double>(j0 + i);
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            const auto xk = static_cast<double>(j0 + k);
            w *= (x - xk) / (xi - xk);
        }
        sum += w * v[j0 + i];
    }
    return sum;
}

inline double checked(double v, const char* name, double t) {
    if (!std::isfinite(v)) {
        throw DdeError(std::string("integrate_dde: non-finite ") + name + " at t=" +
                       std::to_string(t));
    }
    if (v < 0.0) {
        if (v < -1e-9) {
            throw DdeError(std::string("integrate_dde: negative ") + name + " (" +
                           std::to_string(v) + ") at t=" + std::to_string(t));
        }
        return 0.0;
    }
    return v;
}

}  // namespace detail

/// Integrates on the grid 0, step, 2 step, ... up to t_stop. `history`
/// supplies T(t) for t < 0; T(0) = init.T0.
inline DdeSeries integrate_dde(const ModelParams& p, const DdeInitial& init, double t_stop,
                               double step, const DdeHistory& history = zero_history) {
    p.validate();
    if (!(step > 0.0)) throw std::invalid_argument("integrate_dde: step must be positive");
    if (!(t_stop >= 0.0)) throw std::invalid_argument("integrate_dde: t_stop must be nonnegative");
    const double ratio = p.theta / step;
    const auto lag = static_cast<long long>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(lag)) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument("integrate_dde: theta must be an integer multiple of step");
    }

    const auto steps = static_cast<std::size_t>(std::floor(t_stop / step + 1e-9));
    DdeSeries out;
    out.t.reserve(steps + 1);
    out.T.reserve(steps + 1);
    out.E.reserve(steps + 1);
    out.I.reserve(steps + 1);
    out.t.push_back(0.0);
    out.T.push_back(init.T0);
    out.E.push_back(init.E0);
    out.I.push_back(init.I0);

    // lagged T at grid index n - lag + offset, offset in {0, 0.5, 1}
    auto lagged = [&](std::size_t n, double offset) {
        const double idx = static_cast<double>(n) - static_cast<double>(lag) + offset;
        if (idx < 0.0) return history(idx * step);
        const double fl = std::floor(idx);
        if (idx == fl) return out.T[static_cast<std::size_t>(fl)];
        const auto k = static_cast<std::size_t>(fl);
        const std::size_t m = std::min<std::size_t>(4, n + 1);
        std::size_t j0 = k > 0 ? k - 1 : 0;
        j0 = std::min(j0, n + 1 - m);
        return detail::lagrange_on_grid(out.T, j0, m, idx);
    };

    for (std::size_t n = 0; n < steps; ++n) {
        const double T = out.T[n];
        const double E = out.E[n];
        const double I = out.I[n];
        double lag0 = 0.0, lag_half = 0.0, lag1 = 0.0;
        if (lag > 0) {
            lag0 = lagged(n, 0.0);
            lag_half = lagged(n, 0.5);
            lag1 = lagged(n, 1.0);
        }
        const double h = step;
        const bool instant = lag == 0;

        const DdeRhs k1 = dde_rhs(p, T, E, I, instant ? T : lag0);
        const double T2 = T + 0.5 * h * k1.dT, E2 = E + 0.5 * h * k1.dE, I2 = I + 0.5 * h * k1.dI;
        const DdeRhs k2 = dde_rhs(p, T2, E2, I2, instant ? T2 : lag_half);
        const double T3 = T + 0.5 * h * k2.dT, E3 = E + 0.5 * h * k2.dE, I3 = I + 0.5 * h * k2.dI;
        const DdeRhs k3 = dde_rhs(p, T3, E3, I3, instant ? T3 : lag_half);
        const double T4 = T + h * k3.dT, E4 = E + h * k3.dE, I4 = I + h * k3.dI;
        const DdeRhs k4 = dde_rhs(p, T4, E4, I4, instant ? T4 : lag1);

        const double t_next = static_cast<double>(n + 1) * step;
        out.t.push_back(t_next);
        out.T.push_back(detail::checked(T + h / 6.0 * (k1.dT + 2.0 * k2.dT + 2.0 * k3.dT + k4.dT),
                                        "T", t_next));
        out.E.push_back(detail::checked(E + h / 6.0 * (k1.dE + 2.0 * k2.dE + 2.0 * k3.dE + k4.dE),
                                        "E", t_next));
        out.I.push_back(detail::checked(I + h / 6.0 * (k1.dI + 2.0 * k2.dI + 2.0 * k3.dI + k4.dI),
                                        "I", t_next));
    }
    return out;
}

/// Minimum of T over grid times in [t_lo, t_hi].
inline double min_T_over(const DdeSeries& s, double t_lo, double t_hi) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.t[k] >= t_lo && s.t[k] <= t_hi) m = std::min(m, s.T[k]);
    }
    return m;
}

}  // namespace tisim
