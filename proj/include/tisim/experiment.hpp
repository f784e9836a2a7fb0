#pragma once

// Runs an ExperimentSpec end to end and persists its outputs:
//   trajectory / mean curve / DDE series   t,T,E,I
//   eradication density                    bin_start,mass
//   sensitivity surface                    t,<theta_1>,...,<theta_D>
//   sensitivity curve                      t,S
//   per-delay summaries                    see summary_header()
//   manifest.ini                           full resolved config + run metadata
// Files are written only on success; on failure anything already written is
// removed.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "tisim/config.hpp"
#include "tisim/csv.hpp"
#include "tisim/dde.hpp"
#include "tisim/ensemble.hpp"
#include "tisim/sensitivity.hpp"
#include "tisim/version.hpp"

namespace tisim {

/// Throws ConfigError if the spec cannot be run.
inline void validate_spec(const ExperimentSpec& s) {
    try {
        s.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (s.init.T0 < 0 || s.init.E0 < 0 || !(s.init.I0 >= 0.0)) {
        throw ConfigError("initial condition must be nonnegative");
    }
    for (double th : s.thetas) {
        if (!(th >= 0.0)) throw ConfigError("thetas must be nonnegative");
    }
    if (!(s.t_stop >= s.t0)) throw ConfigError("t_stop must not precede t0");
    if (!(s.grid_dt > 0.0)) throw ConfigError("grid_dt must be positive");
    if (!(s.density_bin > 0.0)) throw ConfigError("density_bin must be positive");
    if (s.runs < 1) throw ConfigError("runs must be at least 1");
    if (s.bins < 1) throw ConfigError("bins must be at least 1");
    if (s.event_cap < 1) throw ConfigError("event_cap must be at least 1");
    if (s.out.empty()) throw ConfigError("output directory must be set");
    if (s.kind == ExperimentKind::Dde) {
        if (!(s.dde_step > 0.0)) throw ConfigError("dde step must be positive");
        for (double th : s.delay_values()) {
            const double ratio = th / s.dde_step;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
                throw ConfigError("theta " + format_double(th) +
                                  " is not an integer multiple of the dde step");
            }
        }
    }
    if (s.kind == ExperimentKind::Sensitivity) {
        const auto th = s.delay_values();
        if (th.size() < 2) throw ConfigError("sensitivity needs at least two delay values");
        for (std::size_t i = 0; i < th.size(); ++i) {
            for (std::size_t j = i + 1; j < th.size(); ++j) {
                if (th[i] == th[j]) throw ConfigError("duplicate delay value in thetas");
            }
        }
    }
}

inline EnsembleConfig ensemble_config(const ExperimentSpec& s, double theta, bool keep_samples) {
    EnsembleConfig cfg;
    cfg.params = s.params;
    cfg.params.theta = theta;
    cfg.init = s.init;
    cfg.t0 = s.t0;
    cfg.t_stop = s.t_stop;
    cfg.runs = s.runs;
    cfg.base_seed = s.seed;
    cfg.grid_dt = s.grid_dt;
    cfg.threads = s.threads;
    cfg.keep_samples = keep_samples;
    cfg.engine.event_cap = s.event_cap;
    return cfg;
}

inline std::vector<std::string> summary_header() {
    return {"theta",          "runs",   "included_runs", "capped_runs",  "eradicated",
            "eradication_fraction", "peak_T", "peak_time",     "density_mode"};
}

struct ExperimentResult {
    std::vector<std::filesystem::path> files;
    double wall_seconds = 0.0;
};

class ExperimentRunner {
public:
    ExperimentRunner(ExperimentSpec spec, std::ostream* log) : spec_(std::move(spec)), log_(log) {}

    ExperimentResult run() {
        validate_spec(spec_);
        const auto start = std::chrono::steady_clock::now();
        dir_ = spec_.out;
        std::filesystem::create_directories(dir_);
        try {
            switch (spec_.kind) {
                case ExperimentKind::SingleRun: single_runs(); break;
                case ExperimentKind::Ensemble: ensembles(false); break;
                case ExperimentKind::BifurcationScan: ensembles(true); break;
                case ExperimentKind::Dde: dde(); break;
                case ExperimentKind::Sensitivity: sensitivity(); break;
            }
            result_.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_manifest();
        } catch (...) {
            std::error_code ec;
            for (const auto& f : result_.files) std::filesystem::remove(f, ec);
            throw;
        }
        return result_;
    }

private:
    static std::string theta_tag(double th) { return "theta_" + format_double(th); }

    CsvWriter open(const std::string& name, const std::vector<std::string>& header) {
        const auto path = dir_ / name;
        result_.files.push_back(path);
        return CsvWriter(path.string(), header);
    }

    void note(const std::string& msg) {
        if (log_) *log_ << msg << std::endl;
    }

    void single_runs() {
        for (double th : spec_.delay_values()) {
            ModelParams p = spec_.params;
            p.theta = th;
            EngineOptions eng;
            eng.event_cap = spec_.event_cap;
            RngStream rng(derive_seed(spec_.seed, 0));
            CsvWriter w = open("trajectory_" + theta_tag(th) + ".csv", {"t", "T", "E", "I"});
            RunOutcome o;
            if (spec_.raw) {
                o = simulate(spec_.init, spec_.t0, spec_.t_stop, p, rng, [&](const JumpRecord& r) {
                    w.row({r.t, static_cast<double>(r.q_T), static_cast<double>(r.q_E), r.I});
                }, eng);
            } else {
                GridSampler g(p, spec_.t0, spec_.grid_dt,
                              grid_size(spec_.t0, spec_.t_stop, spec_.grid_dt));
                o = simulate(spec_.init, spec_.t0, spec_.t_stop, p, rng, g, eng);
                g.finish();
                for (std::size_t k = 0; k < g.samples().size(); ++k) {
                    const auto& s = g.samples()[k];
                    w.row({g.grid_time(k), s.T, s.E, s.I});
                }
            }
            w.close();
            note("theta=" + format_double(th) + ": " + std::to_string(o.events) + " events, " +
                 to_string(o.reason));
        }
    }

    void write_mean(double th, const EnsembleSummary& s) {
        CsvWriter w = open("mean_" + theta_tag(th) + ".csv", {"t", "T", "E", "I"});
        for (std::size_t k = 0; k < s.time.size(); ++k) {
            w.row({s.time[k], s.mean_T[k], s.mean_E[k], s.mean_I[k]});
        }
        w.close();
    }

    void write_density(double th, const EradicationDensity& d) {
        CsvWriter w = open("density_" + theta_tag(th) + ".csv", {"bin_start", "mass"});
        for (std::size_t k = 0; k < d.mass.size(); ++k) w.row({d.bin_start[k], d.mass[k]});
        w.close();
    }

    std::vector<double> summary_row(double th, const EnsembleSummary& s,
                                    const EradicationDensity& d) {
        const PeakStatistics pk = peak_statistics(s);
        return {th,
                static_cast<double>(s.runs),
                static_cast<double>(s.included_runs),
                static_cast<double>(s.capped_runs),
                static_cast<double>(s.eradication_times.size()),
                s.eradication_fraction,
                pk.peak,
                pk.time,
                d.mode().value_or(std::nan(""))};
    }

    EnsembleSummary ensemble_for(double th, bool keep) {
        note("theta=" + format_double(th) + ": " + std::to_string(spec_.runs) + " runs");
        EnsembleSummary s = run_ensemble(ensemble_config(spec_, th, keep));
        if (s.capped_runs > 0) {
            note("  warning: " + std::to_string(s.capped_runs) + " runs hit the event cap");
        }
        return s;
    }

    void ensembles(bool bifurcation) {
        std::vector<std::vector<double>> rows;
        for (double th : spec_.delay_values()) {
            const EnsembleSummary s = ensemble_for(th, false);
            const EradicationDensity d = eradication_density(s, spec_.density_bin);
            if (!bifurcation) write_mean(th, s);
            write_density(th, d);
            rows.push_back(summary_row(th, s, d));
        }
        CsvWriter w = open(bifurcation ? "bifurcation.csv" : "summary.csv", summary_header());
        for (const auto& r : rows) w.row(r);
        w.close();
    }

    void dde() {
        const auto stride = static_cast<std::size_t>(
            std::max(1.0, std::round(spec_.grid_dt / spec_.dde_step)));
        for (double th : spec_.delay_values()) {
            ModelParams p = spec_.params;
            p.theta = th;
            const DdeSeries s =
                integrate_dde(p, DdeInitial{static_cast<double>(spec_.init.T0),
                                            static_cast<double>(spec_.init.E0), spec_.init.I0},
                              spec_.t_stop - spec_.t0, spec_.dde_step);
            CsvWriter w = open("dde_" + theta_tag(th) + ".csv", {"t", "T", "E", "I"});
            for (std::size_t k = 0; k < s.size(); k += stride) {
                w.row({spec_.t0 + s.t[k], s.T[k], s.E[k], s.I[k]});
            }
            w.close();
        }
    }

    void sensitivity() {
        std::vector<DelaySamples> per_theta;
        std::vector<std::vector<double>> rows;
        for (double th : spec_.delay_values()) {
            EnsembleSummary s = ensemble_for(th, true);
            const EradicationDensity d = eradication_density(s, spec_.density_bin);
            write_mean(th, s);
            rows.push_back(summary_row(th, s, d));
            per_theta.push_back(delay_samples(th, s));
        }
        {
            CsvWriter w = open("summary.csv", summary_header());
            for (const auto& r : rows) w.row(r);
            w.close();
        }
        const DensityGrid grid = build_density_grid(per_theta, spec_.bins);
        const SensitivitySurface surf = sensitivity_surface(grid);

        std::vector<std::string> header{"t"};
        for (double th : surf.thetas) header.push_back(format_double(th));
        CsvWriter ws = open("sensitivity_surface.csv", header);
        for (std::size_t t = 0; t < surf.time.size(); ++t) {
            std::vector<double> row{surf.time[t]};
            row.insert(row.end(), surf.S[t].begin(), surf.S[t].end());
            ws.row(row);
        }
        ws.close();
        CsvWriter wc = open("sensitivity_curve.csv", {"t", "S"});
        for (std::size_t t = 0; t < surf.time.size(); ++t) wc.row({surf.time[t], surf.curve[t]});
        wc.close();
    }

    void write_manifest() {
        const auto path = dir_ / "manifest.ini";
        result_.files.push_back(path);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "# tisim run manifest; rerun with: tisim --config " << path.filename().string()
            << "\n";
        out << format_config(spec_);
        out << "\n[manifest]\n";
        out << "version = " << kVersion << "\n";
        out << "seed_derivation = splitmix64(seed ^ splitmix64(run_index))\n";
        out << "wall_time_s = " << format_double(result_.wall_seconds) << "\n";
        std::string names;
        for (const auto& f : result_.files) {
            if (f == path) continue;
            if (!names.empty()) names += ", ";
            names += f.filename().string();
        }
        out << "files = " << names << "\n";
        out.close();
        if (out.fail()) throw std::runtime_error("error writing " + path.string());
    }

    ExperimentSpec spec_;
    std::ostream* log_;
    std::filesystem::path dir_;
    ExperimentResult result_;
};

inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr) {
    return ExperimentRunner(spec, log).run();
}

}  // namespace tisim
