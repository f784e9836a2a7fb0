#pragma once

// Exact trajectories of the hybrid process.
//
// Without delay this is a Gillespie-type loop with a time-inhomogeneous
// exit-time distribution (hazard inversion inside il2_field.hpp). With a
// delay, recruitment (channel 6) becomes purely delayed: firing it leaves
// the mode unchanged and schedules an effector arrival theta days later.
// Each candidate exit time is accepted only if it precedes the earliest
// pending arrival; otherwise the process moves to that arrival instead.

#include <cassert>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tisim/il2_field.hpp"
#include "tisim/model.hpp"
#include "tisim/rng.hpp"
#include "tisim/schedule_queue.hpp"

namespace tisim {

enum class Termination { StopTime, Absorbed, EventCap };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::StopTime: return "stop-time";
        case Termination::Absorbed: return "absorbed";
        case Termination::EventCap: return "event-cap";
    }
    return "unknown";
}

struct InitialCondition {
    Count T0 = 1;
    Count E0 = 0;
    double I0 = 0.0;
};

/// State right after a change of counts. `channel` is the stoichiometry
/// column applied (0 for the initial record).
struct JumpRecord {
    double t = 0.0;
    Count q_T = 0;
    Count q_E = 0;
    double I = 0.0;
    int channel = 0;

    friend bool operator==(const JumpRecord&, const JumpRecord&) = default;
};

struct Trajectory {
    std::vector<JumpRecord> records;
    Termination reason = Termination::StopTime;
    std::uint64_t events = 0;
    double t_end = 0.0;
};

struct EngineOptions {
    std::uint64_t event_cap = 2'000'000'000ULL;
    ExitTimeOptions exit{};
};

struct RunOutcome {
    Termination reason = Termination::StopTime;
    std::uint64_t events = 0;   // committed decisions, including delayed initiations
    double t_end = 0.0;
};

/// Smallest j with sum_{i<j} a_i < r2 * sum a <= sum_{i<=j} a_i (1-based).
inline int select_channel(const Rates& rates, double r2) {
    double total = 0.0;
    for (double a : rates) total += a;
    if (!(total > 0.0)) throw std::logic_error("select_channel: all propensities are zero");
    const double target = r2 * total;
    double acc = 0.0;
    int last_positive = 0;
    for (int j = 0; j < kNumChannels; ++j) {
        if (rates[static_cast<std::size_t>(j)] <= 0.0) continue;
        acc += rates[static_cast<std::size_t>(j)];
        last_positive = j + 1;
        if (target <= acc) return j + 1;
    }
    // rounding in the running sum
    return last_positive;
}

namespace detail {

template <class Observer>
RunOutcome run_hybrid(const InitialCondition& init, double t0, double t_stop,
                      const ModelParams& p, RngStream& rng, Observer&& observe,
                      bool with_delay, const EngineOptions& opt) {
    if (init.T0 < 0 || init.E0 < 0 || !(init.I0 >= 0.0)) {
        throw std::invalid_argument("initial condition must be nonnegative");
    }
    p.validate();

    HybridState s{init.T0, init.E0, init.I0, t0};
    double t = t0;
    observe(JumpRecord{t, s.q_T, s.q_E, s.I, 0});

    ScheduleQueue queue;
    RunOutcome out;
    while (t < t_stop) {
        if (out.events >= opt.event_cap) {
            out.reason = Termination::EventCap;
            out.t_end = t;
            return out;
        }
        s.t_q = t;
        const ModeFlow flow = mode_flow(s, p);
        const ModeHazard hazard(s, flow, p);
        const double tau = invert_hazard(hazard, -std::log(rng.uniform_open()), opt.exit);
        const double candidate = t + tau;

        if (with_delay && !queue.empty() && queue.head() <= candidate) {
            // candidate rejected: the earliest scheduled recruitment completes first
            const double completion = queue.head();
            if (completion >= t_stop) break;
            queue.dequeue();
            const double I_new = flow_at(flow, completion);
            s = apply_channel(s, kDelayedChannel);
            s.I = I_new;
            t = completion;
            ++out.events;
            observe(JumpRecord{t, s.q_T, s.q_E, s.I, kDelayedChannel});
            continue;
        }
        if (tau == kNever) {
            out.reason = Termination::Absorbed;
            out.t_end = t;
            return out;
        }
        if (candidate >= t_stop) break;

        assert(!with_delay || candidate < queue.head());
        const double I_new = flow_at(flow, candidate);
        const int j = select_channel(propensities(s, I_new, p), rng.uniform_open());
        t = candidate;
        s.I = I_new;
        ++out.events;
        if (with_delay && j == kDelayedChannel) {
            queue.enqueue(t + p.theta);
            continue;
        }
        s = apply_channel(s, j);
        observe(JumpRecord{t, s.q_T, s.q_E, s.I, j});
    }
    out.reason = Termination::StopTime;
    out.t_end = t_stop;
    return out;
}

}  // namespace detail

/// Streams every state change of a delay-free trajectory into `observe`.
template <class Observer>
    requires std::invocable<Observer&, const JumpRecord&>
RunOutcome simulate_nodelay(const InitialCondition& init, double t0, double t_stop,
                            const ModelParams& p, RngStream& rng, Observer&& observe,
                            const EngineOptions& opt = {}) {
    return detail::run_hybrid(init, t0, t_stop, p, rng, observe, false, opt);
}

/// Streams every state change of a trajectory with delayed recruitment into
/// `observe`. Delayed initiations do not change counts and are not reported.
template <class Observer>
    requires std::invocable<Observer&, const JumpRecord&>
RunOutcome simulate_delayed(const InitialCondition& init, double t0, double t_stop,
                            const ModelParams& p, RngStream& rng, Observer&& observe,
                            const EngineOptions& opt = {}) {
    return detail::run_hybrid(init, t0, t_stop, p, rng, observe, true, opt);
}

inline Trajectory simulate_nodelay(const InitialCondition& init, double t0, double t_stop,
                                   const ModelParams& p, RngStream& rng,
                                   const EngineOptions& opt = {}) {
    Trajectory tr;
    const RunOutcome o = simulate_nodelay(
        init, t0, t_stop, p, rng, [&](const JumpRecord& r) { tr.records.push_back(r); }, opt);
    tr.reason = o.reason;
    tr.events = o.events;
    tr.t_end = o.t_end;
    return tr;
}

inline Trajectory simulate_delayed(const InitialCondition& init, double t0, double t_stop,
                                   const ModelParams& p, RngStream& rng,
                                   const EngineOptions& opt = {}) {
    Trajectory tr;
    const RunOutcome o = simulate_delayed(
        init, t0, t_stop, p, rng, [&](const JumpRecord& r) { tr.records.push_back(r); }, opt);
    tr.reason = o.reason;
    tr.events = o.events;
    tr.t_end = o.t_end;
    return tr;
}

/// Dispatches on theta: the queue-free loop for theta == 0.
template <class Observer>
    requires std::invocable<Observer&, const JumpRecord&>
RunOutcome simulate(const InitialCondition& init, double t0, double t_stop, const ModelParams& p,
                    RngStream& rng, Observer&& observe, const EngineOptions& opt = {}) {
    return p.theta > 0.0 ? simulate_delayed(init, t0, t_stop, p, rng, observe, opt)
                         : simulate_nodelay(init, t0, t_stop, p, rng, observe, opt);
}

inline std::optional<double> first_eradication_time(const Trajectory& tr) {
    for (const JumpRecord& r : tr.records) {
        if (r.q_T == 0) return r.t;
    }
    return std::nullopt;
}

/// Thins a jump sequence onto the grid t0, t0+dt, ...: each gridpoint takes
/// the counts of the last jump at or before it, and the IL-2 value of the
/// mode flow evaluated at the gridpoint.
class GridSampler {
public:
    struct Sample {
        double T = 0.0;
        double E = 0.0;
        double I = 0.0;
    };

    GridSampler(const ModelParams& p, double t0, double dt, std::size_t points)
        : p_(p), t0_(t0), dt_(dt), samples_(points) {
        if (!(dt > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    }

    void operator()(const JumpRecord& r) {
        if (have_last_) fill_until(r.t, false);
        last_ = r;
        have_last_ = true;
        if (r.q_T == 0 && !eradication_) eradication_ = r.t;
        if (static_cast<double>(r.q_T) > max_T_) max_T_ = static_cast<double>(r.q_T);
    }

    /// Fills the remaining gridpoints with the final state.
    void finish() {
        if (have_last_) fill_until(kNever, true);
    }

    const std::vector<Sample>& samples() const { return samples_; }
    std::optional<double> eradication_time() const { return eradication_; }
    double max_T() const { return max_T_; }

    double grid_time(std::size_t k) const { return t0_ + dt_ * static_cast<double>(k); }

private:
    void fill_until(double t_next, bool inclusive) {
        const ModeFlow flow = mode_flow(HybridState{last_.q_T, last_.q_E, last_.I, last_.t}, p_);
        while (next_ < samples_.size()) {
            const double g = grid_time(next_);
            if (inclusive ? g > t_next : g >= t_next) break;
            samples_[next_] = Sample{static_cast<double>(last_.q_T), static_cast<double>(last_.q_E),
                                     g >= last_.t ? flow_at(flow, g) : last_.I};
            ++next_;
        }
    }

    ModelParams p_;
    double t0_;
    double dt_;
    std::vector<Sample> samples_;
    std::size_t next_ = 0;
    JumpRecord last_{};
    bool have_last_ = false;
    std::optional<double> eradication_;
    double max_T_ = 0.0;
};

/// Number of gridpoints t0 + k dt with t <= t_stop.
inline std::size_t grid_size(double t0, double t_stop, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (t_stop < t0) return 1;
    return static_cast<std::size_t>(std::floor((t_stop - t0) / dt + 1e-9)) + 1;
}

}  // namespace tisim
