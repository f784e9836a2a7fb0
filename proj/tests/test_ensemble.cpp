#include <gtest/gtest.h>

#include <cmath>

#include "tisim/ensemble.hpp"

using namespace tisim;

namespace {

EnsembleConfig small_config() {
    EnsembleConfig cfg;
    cfg.params.c = 0.03;
    cfg.params.theta = 1.0;
    cfg.init = {20, 2, 0.0};
    cfg.t_stop = 30.0;
    cfg.runs = 24;
    cfg.base_seed = 99;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST(Ensemble, SingleRunEqualsThinnedTrajectory) {
    EnsembleConfig cfg = small_config();
    cfg.runs = 1;
    cfg.keep_samples = true;
    const EnsembleSummary s = run_ensemble(cfg);

    GridSampler g(cfg.params, cfg.t0, cfg.grid_dt, grid_size(cfg.t0, cfg.t_stop, cfg.grid_dt));
    RngStream rng(derive_seed(cfg.base_seed, 0));
    simulate(cfg.init, cfg.t0, cfg.t_stop, cfg.params, rng, g);
    g.finish();

    ASSERT_EQ(s.time.size(), 31u);
    for (std::size_t k = 0; k < s.time.size(); ++k) {
        EXPECT_EQ(s.time[k], static_cast<double>(k));
        EXPECT_EQ(s.mean_T[k], g.samples()[k].T);
        EXPECT_EQ(s.mean_E[k], g.samples()[k].E);
        EXPECT_EQ(s.mean_I[k], g.samples()[k].I);
        EXPECT_EQ(s.T_samples[0][k], g.samples()[k].T);
    }
    EXPECT_EQ(s.runs, 1u);
    EXPECT_EQ(s.included_runs, 1u);
}

TEST(Ensemble, Reproducible) {
    const EnsembleConfig cfg = small_config();
    const EnsembleSummary a = run_ensemble(cfg);
    const EnsembleSummary b = run_ensemble(cfg);
    EXPECT_EQ(a.mean_T, b.mean_T);
    EXPECT_EQ(a.mean_E, b.mean_E);
    EXPECT_EQ(a.mean_I, b.mean_I);
    EXPECT_EQ(a.eradication_times, b.eradication_times);
}

TEST(Ensemble, IndependentOfThreadCount) {
    EnsembleConfig cfg = small_config();
    const EnsembleSummary a = run_ensemble(cfg);
    cfg.threads = 4;
    const EnsembleSummary b = run_ensemble(cfg);
    EXPECT_EQ(a.mean_T, b.mean_T);
    EXPECT_EQ(a.mean_E, b.mean_E);
    EXPECT_EQ(a.eradication_times, b.eradication_times);
}

TEST(Ensemble, MeansAreNonnegativeAndFractionConsistent) {
    EnsembleConfig cfg = small_config();
    cfg.params.g_T = 1e-3;
    cfg.init = {5, 2, 0.0};
    cfg.runs = 50;
    const EnsembleSummary s = run_ensemble(cfg);
    for (double v : s.mean_T) EXPECT_GE(v, 0.0);
    for (double v : s.mean_E) EXPECT_GE(v, 0.0);
    EXPECT_DOUBLE_EQ(s.eradication_fraction,
                     static_cast<double>(s.eradication_times.size()) / static_cast<double>(s.runs));
    EXPECT_GT(s.eradication_times.size(), 0u);
}

TEST(Ensemble, CappedRunsAreExcludedFromMeans) {
    EnsembleConfig cfg = small_config();
    cfg.engine.event_cap = 5;
    cfg.runs = 4;
    const EnsembleSummary s = run_ensemble(cfg);
    EXPECT_EQ(s.capped_runs, 4u);
    EXPECT_EQ(s.included_runs, 0u);
    for (double v : s.mean_T) EXPECT_EQ(v, 0.0);
}

TEST(Ensemble, MonotoneCoverageInHorizon) {
    EnsembleConfig cfg = small_config();
    cfg.params.g_T = 1e-3;
    cfg.init = {20, 2, 0.0};
    cfg.runs = 60;
    cfg.t_stop = 5.0;
    const double early = run_ensemble(cfg).eradication_fraction;
    cfg.t_stop = 15.0;
    const double late = run_ensemble(cfg).eradication_fraction;
    EXPECT_LE(early, late);
    EXPECT_GT(late, 0.0);
}

TEST(Ensemble, BinomialConsistencyAcrossSeeds) {
    EnsembleConfig cfg = small_config();
    cfg.params.g_T = 1e-3;
    cfg.init = {20, 2, 0.0};
    cfg.runs = 200;
    cfg.t_stop = 15.0;
    cfg.base_seed = 1;
    const double p1 = run_ensemble(cfg).eradication_fraction;
    cfg.base_seed = 2;
    const double p2 = run_ensemble(cfg).eradication_fraction;
    const double p = 0.5 * (p1 + p2);
    ASSERT_GT(p, 0.0);
    ASSERT_LT(p, 1.0);
    EXPECT_LE(std::abs(p1 - p2), 4.0 * std::sqrt(p * (1.0 - p) / 200.0));
}

TEST(Ensemble, RejectsInvalidConfig) {
    EnsembleConfig cfg = small_config();
    cfg.runs = 0;
    EXPECT_THROW(run_ensemble(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.grid_dt = 0.0;
    EXPECT_THROW(run_ensemble(cfg), std::invalid_argument);
}

TEST(EradicationDensity, PointMass) {
    const std::vector<double> t(7, 10.0);
    const EradicationDensity d = eradication_density(t, 1.0);
    ASSERT_EQ(d.mass.size(), 1u);
    EXPECT_EQ(d.bin_start[0], 10.0);
    EXPECT_EQ(d.mass[0], 1.0);
    EXPECT_EQ(d.mode(), 10.0);
}

TEST(EradicationDensity, NormalizedOverEradicatedRuns) {
    const EradicationDensity d = eradication_density({3.2, 3.9, 5.5, 3.0}, 1.0);
    ASSERT_EQ(d.mass.size(), 3u);
    EXPECT_EQ(d.bin_start[0], 3.0);
    EXPECT_EQ(d.mass[0], 0.75);
    EXPECT_EQ(d.mass[1], 0.0);
    EXPECT_EQ(d.mass[2], 0.25);
    EXPECT_EQ(d.mode(), 3.0);
}

TEST(EradicationDensity, EmptyInputGivesEmptyDensity) {
    const EradicationDensity d = eradication_density(std::vector<double>{}, 1.0);
    EXPECT_TRUE(d.empty());
    EXPECT_FALSE(d.mode().has_value());
    EXPECT_THROW(eradication_density(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST(PeakStatistics, MonotoneDecreasingPeaksAtStart) {
    EnsembleSummary s;
    s.time = {0, 1, 2, 3};
    s.mean_T = {9, 7, 4, 1};
    const PeakStatistics p = peak_statistics(s);
    EXPECT_EQ(p.peak, 9.0);
    EXPECT_EQ(p.time, 0.0);
    s.mean_T = {1, 5, 8, 2};
    EXPECT_EQ(peak_statistics(s).time, 2.0);
}

TEST(Seeds, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
}

TEST(Seeds, UniformIsOpenInterval) {
    RngStream rng(0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform_open();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
