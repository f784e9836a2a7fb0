#pragma once

// IL-2 flow inside a mode and the cumulative hazard of leaving it.
//
// With frozen counts the IL-2 equation is linear, so
//     I(t) = B + (I_q - B) exp(-mu_I (t - t_q)).
// Only a4 depends on I; its integral has the closed form
//     int_0^tau I/(g+I) du = (B/K) tau - g/(K mu) ln((g + I(tau)) / (g + I_q)),
// K = g + B, which is what the hazard inversion below relies on. The two
// terms cancel badly when I << g, so it is evaluated regrouped into three
// nonnegative parts (z = mu tau, y = 1 - e^-z, x = -(I_q - B) y / (g + I_q)):
//     [B (z - y) + g (x - ln(1 + x))] / (K mu) + I_q y / ((g + I_q) mu).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tisim/model.hpp"

namespace tisim {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

namespace detail {

// z - (1 - e^-z) for z >= 0, accurate for small z.
inline double z_minus_expm1_neg(double z, double em1) {
    if (z > 0.1) return z + em1;
    // z^2/2 - z^3/6 + z^4/24 - ...
    double term = z * z / 2.0;
    double sum = term;
    for (int k = 3; k < 12; ++k) {
        term *= -z / k;
        sum += term;
    }
    return sum;
}

// x - ln(1 + x) for x > -1, accurate for small |x|.
inline double x_minus_log1p(double x) {
    if (std::abs(x) > 0.1) return x - std::log1p(x);
    // x^2/2 - x^3/3 + x^4/4 - ...
    double p = x * x;
    double sum = 0.0;
    for (int k = 2; k < 20; ++k) {
        sum += (k % 2 == 0 ? p : -p) / k;
        p *= x;
    }
    return sum;
}

}  // namespace detail

struct ModeFlow {
    double B = 0.0;     // asymptotic IL-2 level of the mode
    double I_q = 0.0;   // IL-2 at mode entry
    double t_q = 0.0;   // mode entry time
    double mu_I = 1.0;
};

/// Asymptotic IL-2 level for mode (q_T, q_E).
inline double il2_asymptote(Count q_T, Count q_E, const ModelParams& p) {
    if (q_T <= 0 || q_E <= 0) return 0.0;
    const auto qT = static_cast<double>(q_T);
    const auto qE = static_cast<double>(q_E);
    return p.p_I * qT * qE / (p.g_I * p.V * p.V + qT * p.V) / p.mu_I;
}

inline ModeFlow mode_flow(const HybridState& s, const ModelParams& p) {
    return ModeFlow{il2_asymptote(s.q_T, s.q_E, p), s.I, s.t_q, p.mu_I};
}

inline double flow_at(const ModeFlow& f, double t) {
    const double dt = t - f.t_q;
    if (dt <= 0.0) return f.I_q;
    const double v = f.B + (f.I_q - f.B) * std::exp(-f.mu_I * dt);
    // clamp against rounding outside the segment [I_q, B]
    return std::clamp(v, std::min(f.I_q, f.B), std::max(f.I_q, f.B));
}

/// Cumulative hazard of one mode, precomputed so that repeated evaluations
/// during root finding cost one expm1 and one log1p.
class ModeHazard {
public:
    ModeHazard(const HybridState& s, const ModeFlow& f, const ModelParams& p)
        : A_(constant_rate(s, p)),
          k4_(p.p_E * static_cast<double>(s.q_E)),
          g_(p.g_E),
          B_(f.B),
          C_(f.I_q - f.B),
          I_q_(f.I_q),
          mu_(f.mu_I) {
        if (s.q_E <= 0 || (f.I_q <= 0.0 && f.B <= 0.0)) k4_ = 0.0;
        if (k4_ > 0.0 && g_ > 0.0) {
            K_ = g_ + B_;
            slope4_ = B_ / K_;
        } else if (k4_ > 0.0) {
            // g_E = 0: a4 saturates at p_E q_E whenever I > 0
            slope4_ = 1.0;
        }
    }

    /// Time-constant part of the total propensity.
    double constant_part() const { return A_; }
    bool homogeneous() const { return k4_ == 0.0; }

    double operator()(double tau) const {
        if (k4_ == 0.0) return A_ * tau;
        return A_ * tau + k4_ * a4_integral(tau, std::expm1(-mu_ * tau));
    }

    /// The IL-2 dependent part of the hazard: integral of a4 over [0, tau].
    double effector_growth_part(double tau) const {
        if (k4_ == 0.0) return 0.0;
        return k4_ * a4_integral(tau, std::expm1(-mu_ * tau));
    }

    /// Total propensity at offset tau, i.e. the derivative of the hazard.
    double rate(double tau) const {
        if (k4_ == 0.0) return A_;
        return A_ + a4_at(std::expm1(-mu_ * tau));
    }

    /// d rate / d tau at tau = 0.
    double rate_slope0() const {
        if (k4_ == 0.0 || g_ == 0.0) return 0.0;
        const double d = g_ + I_q_;
        return -k4_ * g_ * mu_ * C_ / (d * d);
    }

    /// Large-tau slope; zero means the hazard saturates.
    double asymptotic_rate() const { return A_ + k4_ * slope4_; }

    /// Finite limit of the hazard when asymptotic_rate() == 0.
    double saturation_level() const {
        if (k4_ == 0.0 || g_ == 0.0) return 0.0;
        // B = 0 here, so K = g and I(tau) -> 0
        return k4_ / mu_ * std::log1p(I_q_ / g_);
    }

    // Evaluates hazard and rate sharing one expm1.
    void eval(double tau, double& hazard, double& rate) const {
        if (k4_ == 0.0) {
            hazard = A_ * tau;
            rate = A_;
            return;
        }
        const double em1 = std::expm1(-mu_ * tau);
        hazard = A_ * tau + k4_ * a4_integral(tau, em1);
        rate = A_ + a4_at(em1);
    }

private:
    double a4_integral(double tau, double em1) const {
        if (g_ == 0.0) return tau;
        const double z = mu_ * tau;
        const double y = -em1;
        const double x = -C_ * y / (g_ + I_q_);
        assert(x > -1.0);
        const double v = (B_ * detail::z_minus_expm1_neg(z, em1) + g_ * detail::x_minus_log1p(x)) /
                             (K_ * mu_) +
                         I_q_ * y / ((g_ + I_q_) * mu_);
        return std::max(v, 0.0);
    }

    double a4_at(double em1) const {
        const double I = std::max(B_ + C_ * (1.0 + em1), 0.0);
        return I > 0.0 ? k4_ * I / (g_ + I) : 0.0;
    }

    double A_;
    double k4_;
    double g_;
    double B_;
    double C_;
    double I_q_;
    double mu_;
    double K_ = 0.0;
    double slope4_ = 0.0;
};

/// Integral of the total propensity over [t_q, t_q + tau].
inline double cumulative_hazard(const HybridState& s, const ModeFlow& f, const ModelParams& p,
                                double tau) {
    if (tau < 0.0) throw std::invalid_argument("cumulative_hazard: tau must be nonnegative");
    return ModeHazard(s, f, p)(tau);
}

struct ExitTimeOptions {
    double horizon = 1e5;     // give up (return kNever) beyond this many days
    double rel_tol = 1e-12;   // on |hazard - target| / target
};

/// Solves hazard(tau) = target for tau >= 0, or returns kNever if the hazard
/// cannot reach the target within the horizon.
inline double invert_hazard(const ModeHazard& h, double target, const ExitTimeOptions& opt = {}) {
    if (target <= 0.0) return 0.0;
    if (h.homogeneous()) {
        const double A = h.constant_part();
        if (A <= 0.0) return kNever;
        const double tau = target / A;
        return tau <= opt.horizon ? tau : kNever;
    }
    if (h.asymptotic_rate() <= 0.0 && target >= h.saturation_level()) return kNever;

    const double tol = opt.rel_tol * target;
    const double r0 = h.rate(0.0);
    double tau = 0.0;
    if (r0 > 0.0) {
        // second-order start: r0 tau + slope tau^2 / 2 = target
        const double disc = r0 * r0 + 2.0 * h.rate_slope0() * target;
        tau = disc > 0.0 ? 2.0 * target / (r0 + std::sqrt(disc)) : target / r0;
    } else {
        tau = target / std::max(h.asymptotic_rate(), 1e-300);
    }
    tau = std::min(tau, opt.horizon);

    // Safeguarded Newton; hazard' = total propensity > 0. The bracket
    // [lo, hi] is open-ended until the first overshoot.
    double lo = 0.0;
    double hi = kNever;
    for (int it = 0; it < 400; ++it) {
        double F = 0.0;
        double dF = 0.0;
        h.eval(tau, F, dF);
        F -= target;
        if (std::abs(F) <= tol) return tau;
        if (F < 0.0) {
            if (tau >= opt.horizon) return kNever;
            lo = tau;
        } else {
            hi = tau;
        }
        if (hi < kNever && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return tau;
        double next = dF > 0.0 ? tau - F / dF : lo;
        if (!(next > lo && next < hi)) {
            next = hi < kNever ? 0.5 * (lo + hi) : 2.0 * std::max(tau, 1e-300);
        }
        tau = std::min(next, opt.horizon);
    }
    return tau;
}

/// Samples the mode exit time by unit-rate Poisson inversion:
/// hazard(tau) = ln(1/r1).
inline double sample_exit_time(const HybridState& s, const ModeFlow& f, const ModelParams& p,
                               double r1, const ExitTimeOptions& opt = {}) {
    if (!(r1 > 0.0 && r1 <= 1.0)) {
        throw std::invalid_argument("sample_exit_time: r1 must lie in (0, 1]");
    }
    return invert_hazard(ModeHazard(s, f, p), -std::log(r1), opt);
}

}  // namespace tisim
