#pragma once

// Monte Carlo ensembles over independent trajectories.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "tisim/engine.hpp"
#include "tisim/rng.hpp"

namespace tisim {

struct EnsembleConfig {
    ModelParams params{};
    InitialCondition init{};
    double t0 = 0.0;
    double t_stop = 200.0;
    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    double grid_dt = 1.0;
    unsigned threads = 0;        // 0: hardware concurrency
    bool keep_samples = false;   // retain per-run T on the grid
    EngineOptions engine{};

    void validate() const {
        params.validate();
        if (runs < 1) throw std::invalid_argument("ensemble: runs must be at least 1");
        if (!(grid_dt > 0.0)) throw std::invalid_argument("ensemble: grid_dt must be positive");
        if (!(t_stop >= t0)) throw std::invalid_argument("ensemble: t_stop must not precede t0");
    }
};

struct EnsembleSummary {
    std::vector<double> time;
    std::vector<double> mean_T;
    std::vector<double> mean_E;
    std::vector<double> mean_I;
    std::vector<double> eradication_times;   // one entry per eradicated run, run order
    std::size_t runs = 0;
    std::size_t included_runs = 0;   // runs entering the mean curves
    std::size_t capped_runs = 0;     // runs stopped by the event cap
    double eradication_fraction = 0.0;
    double max_T = 0.0;              // largest T over all gridpoints and runs
    // T at each gridpoint for every included run (only with keep_samples)
    std::vector<std::vector<double>> T_samples;
};

struct RunResult {
    std::vector<GridSampler::Sample> samples;
    std::optional<double> eradication;
    RunOutcome outcome;
};

/// One thinned trajectory; seed derived from (base_seed, index).
inline RunResult run_single(const EnsembleConfig& cfg, std::size_t index) {
    const std::size_t n = grid_size(cfg.t0, cfg.t_stop, cfg.grid_dt);
    GridSampler sampler(cfg.params, cfg.t0, cfg.grid_dt, n);
    RngStream rng(derive_seed(cfg.base_seed, index));
    RunResult res;
    res.outcome = simulate(cfg.init, cfg.t0, cfg.t_stop, cfg.params, rng, sampler, cfg.engine);
    sampler.finish();
    res.samples = sampler.samples();
    res.eradication = sampler.eradication_time();
    return res;
}

/// Calls `work(i)` for i in [0, count) on a pool of worker threads. The first
/// exception thrown by any worker is rethrown after all workers stop.
template <class Work>
void parallel_for(std::size_t count, unsigned threads, Work&& work) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                work(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

/// Reduces per-run results in run order, so the summary does not depend on
/// scheduling.
inline EnsembleSummary summarize(const EnsembleConfig& cfg, const std::vector<RunResult>& results) {
    const std::size_t n = grid_size(cfg.t0, cfg.t_stop, cfg.grid_dt);
    EnsembleSummary sum;
    sum.runs = results.size();
    sum.time.resize(n);
    for (std::size_t k = 0; k < n; ++k) sum.time[k] = cfg.t0 + cfg.grid_dt * static_cast<double>(k);
    sum.mean_T.assign(n, 0.0);
    sum.mean_E.assign(n, 0.0);
    sum.mean_I.assign(n, 0.0);

    for (const RunResult& r : results) {
        if (r.eradication) sum.eradication_times.push_back(*r.eradication);
        if (r.outcome.reason == Termination::EventCap) {
            ++sum.capped_runs;
            continue;
        }
        ++sum.included_runs;
        for (std::size_t k = 0; k < n; ++k) {
            sum.mean_T[k] += r.samples[k].T;
            sum.mean_E[k] += r.samples[k].E;
            sum.mean_I[k] += r.samples[k].I;
            sum.max_T = std::max(sum.max_T, r.samples[k].T);
        }
        if (cfg.keep_samples) {
            std::vector<double> row(n);
            for (std::size_t k = 0; k < n; ++k) row[k] = r.samples[k].T;
            sum.T_samples.push_back(std::move(row));
        }
    }
    if (sum.included_runs > 0) {
        const auto m = static_cast<double>(sum.included_runs);
        for (std::size_t k = 0; k < n; ++k) {
            sum.mean_T[k] /= m;
            sum.mean_E[k] /= m;
            sum.mean_I[k] /= m;
        }
    }
    sum.eradication_fraction =
        static_cast<double>(sum.eradication_times.size()) / static_cast<double>(sum.runs);
    return sum;
}

inline EnsembleSummary run_ensemble(const EnsembleConfig& cfg) {
    cfg.validate();
    std::vector<RunResult> results(cfg.runs);
    parallel_for(cfg.runs, cfg.threads, [&](std::size_t i) { results[i] = run_single(cfg, i); });
    return summarize(cfg, results);
}

struct EradicationDensity {
    double bin = 1.0;
    std::vector<double> bin_start;
    std::vector<double> mass;   // sums to one over eradicated runs

    bool empty() const { return mass.empty(); }

    /// Start of the heaviest bin (first one on ties).
    std::optional<double> mode() const {
        if (mass.empty()) return std::nullopt;
        const auto it = std::max_element(mass.begin(), mass.end());
        return bin_start[static_cast<std::size_t>(it - mass.begin())];
    }
};

/// Histogram of first-hitting times of T = 0 with bins [origin + k*bin,
/// origin + (k+1)*bin). Empty when no run was eradicated.
inline EradicationDensity eradication_density(const std::vector<double>& hitting_times,
                                              double bin = 1.0, double origin = 0.0) {
    if (!(bin > 0.0)) throw std::invalid_argument("eradication_density: bin must be positive");
    EradicationDensity d;
    d.bin = bin;
    if (hitting_times.empty()) return d;
    auto index = [&](double t) { return static_cast<long long>(std::floor((t - origin) / bin)); };
    const auto [lo_it, hi_it] = std::minmax_element(hitting_times.begin(), hitting_times.end());
    const long long first = index(*lo_it);
    const long long last = index(*hi_it);
    const auto nbins = static_cast<std::size_t>(last - first + 1);
    d.bin_start.resize(nbins);
    d.mass.assign(nbins, 0.0);
    for (std::size_t k = 0; k < nbins; ++k) {
        d.bin_start[k] = origin + bin * static_cast<double>(first + static_cast<long long>(k));
    }
    for (double t : hitting_times) d.mass[static_cast<std::size_t>(index(t) - first)] += 1.0;
    const auto n = static_cast<double>(hitting_times.size());
    for (double& m : d.mass) m /= n;
    return d;
}

inline EradicationDensity eradication_density(const EnsembleSummary& s, double bin = 1.0) {
    return eradication_density(s.eradication_times, bin, s.time.empty() ? 0.0 : s.time.front());
}

struct PeakStatistics {
    double peak = 0.0;
    double time = 0.0;
};

/// Maximum of the mean tumor curve and its (first) time.
inline PeakStatistics peak_statistics(const EnsembleSummary& s) {
    PeakStatistics p;
    if (s.mean_T.empty()) return p;
    const auto it = std::max_element(s.mean_T.begin(), s.mean_T.end());
    const auto k = static_cast<std::size_t>(it - s.mean_T.begin());
    p.peak = *it;
    p.time = s.time[k];
    return p;
}

}  // namespace tisim
