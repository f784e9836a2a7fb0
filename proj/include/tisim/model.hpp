#pragma once

// Tumor / effector / IL-2 hybrid model: parameters, discrete state,
// propensities and stoichiometry.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tisim {

using Count = std::int64_t;

inline constexpr int kNumChannels = 6;
inline constexpr int kDelayedChannel = 6;

struct ModelParams {
    double r = 0.18;       // tumor growth, 1/day
    double b = 1e-9;       // inverse carrying capacity, 1/ml
    double V = 3.2;        // reference volume, ml
    double p_T = 1.0;      // kill strength, ml/day
    double g_T = 1e5;      // kill half-saturation, 1/ml
    double p_E = 0.1245;   // IL-2 stimulated effector growth, 1/day
    double g_E = 2e7;      // effector growth half-saturation, pg/l
    double mu_E = 0.03;    // effector death, 1/day
    double c = 0.02;       // immunogenicity, 1/day
    double p_I = 5.0;      // IL-2 production, pg/day
    double g_I = 1e3;      // IL-2 production half-saturation, 1/ml
    double mu_I = 10.0;    // IL-2 degradation, 1/day
    double theta = 0.0;    // recruitment delay, day

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const {
        auto nonneg = [](double v, const char* name) {
            if (!(v >= 0.0)) {
                throw std::invalid_argument(std::string("parameter ") + name +
                                            " must be nonnegative");
            }
        };
        nonneg(r, "r");
        nonneg(b, "b");
        nonneg(p_T, "p_T");
        nonneg(g_T, "g_T");
        nonneg(p_E, "p_E");
        nonneg(g_E, "g_E");
        nonneg(mu_E, "mu_E");
        nonneg(c, "c");
        nonneg(p_I, "p_I");
        nonneg(g_I, "g_I");
        nonneg(theta, "theta");
        if (!(V > 0.0)) throw std::invalid_argument("parameter V must be positive");
        if (!(mu_I > 0.0)) throw std::invalid_argument("parameter mu_I must be positive");
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// A point of the piecewise-deterministic process: mode (q_T, q_E) plus the
/// IL-2 level I, valid at mode entry time t_q.
struct HybridState {
    Count q_T = 0;
    Count q_E = 0;
    double I = 0.0;
    double t_q = 0.0;

    friend bool operator==(const HybridState&, const HybridState&) = default;
};

struct ReactionChannel {
    int index;       // 1..6
    Count d_T;
    Count d_E;
    bool delayed;
};

// Columns of the stoichiometry matrix, channel j at position j-1.
inline constexpr std::array<ReactionChannel, kNumChannels> kChannels{{
    {1, +1, 0, false},   // tumor proliferation
    {2, -1, 0, false},   // logistic tumor death
    {3, -1, 0, false},   // effector kill
    {4, 0, +1, false},   // IL-2 stimulated effector growth
    {5, 0, -1, false},   // effector death
    {6, 0, +1, true},    // recruitment (delayed by theta)
}};

using Rates = std::array<double, kNumChannels>;

/// Propensities a1..a6 of mode (q_T, q_E) at IL-2 level `I_now`; only a4
/// depends on I.
inline Rates propensities(const HybridState& s, double I_now, const ModelParams& p) {
    const auto qT = static_cast<double>(s.q_T);
    const auto qE = static_cast<double>(s.q_E);
    Rates a{};
    a[0] = p.r * qT;
    // divide by V before the quadratic factor
    a[1] = s.q_T > 1 ? p.r * p.b * (qT / p.V) * (qT - 1.0) : 0.0;
    a[2] = (s.q_T > 0 && s.q_E > 0) ? p.p_T * qT * qE / (p.g_T * p.V + qT) : 0.0;
    a[3] = (s.q_E > 0 && I_now > 0.0) ? p.p_E * qE * I_now / (p.g_E + I_now) : 0.0;
    a[4] = p.mu_E * qE;
    a[5] = p.c * qT;
    return a;
}

/// Sum of the I-independent propensities (all channels except 4).
inline double constant_rate(const HybridState& s, const ModelParams& p) {
    const Rates a = propensities(s, 0.0, p);
    return a[0] + a[1] + a[2] + a[4] + a[5];
}

class ChannelUnderflow : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Applies stoichiometry column `j` (1-based) to the counts. I and t_q are
/// left for the caller.
inline HybridState apply_channel(HybridState s, int j) {
    if (j < 1 || j > kNumChannels) {
        throw std::out_of_range("reaction channel index out of range: " + std::to_string(j));
    }
    const ReactionChannel& ch = kChannels[static_cast<std::size_t>(j - 1)];
    const Count t = s.q_T + ch.d_T;
    const Count e = s.q_E + ch.d_E;
    if (t < 0 || e < 0) {
        throw ChannelUnderflow("channel " + std::to_string(j) +
                               " applied to a zero count (q_T=" + std::to_string(s.q_T) +
                               ", q_E=" + std::to_string(s.q_E) + ")");
    }
    s.q_T = t;
    s.q_E = e;
    return s;
}

}  // namespace tisim
