#pragma once

// Density-based sensitivity of the tumor distribution to the delay.
//
// For each delay node theta_k and time t the empirical distribution
// P_k[T(t) = x] is histogrammed over a common range [0, max_T]. Per bin, the
// values across delay nodes are interpolated by the Lagrange polynomial
// through all D nodes; the sensitivity at (t, theta_k) is
//     S(t, theta_k) = sum_x |dP/dtheta (theta_k, x)| * P_k(x),
// and the overall curve integrates S over the delay range (trapezoid rule).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tisim/ensemble.hpp"

namespace tisim {

/// Interpolating polynomial through (x_k, y_k) in barycentric form.
class LagrangePolynomial {
public:
    LagrangePolynomial(std::vector<double> nodes, std::vector<double> values)
        : x_(std::move(nodes)), y_(std::move(values)) {
        if (x_.size() != y_.size()) throw std::invalid_argument("Lagrange: size mismatch");
        if (x_.size() < 2) throw std::invalid_argument("Lagrange: need at least two nodes");
        w_ = barycentric_weights(x_);
    }

    static std::vector<double> barycentric_weights(const std::vector<double>& x) {
        std::vector<double> w(x.size(), 1.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            for (std::size_t k = 0; k < x.size(); ++k) {
                if (k == j) continue;
                const double d = x[j] - x[k];
                if (d == 0.0) throw std::invalid_argument("Lagrange: duplicate nodes");
                w[j] /= d;
            }
        }
        return w;
    }

    std::size_t degree() const { return x_.size() - 1; }
    const std::vector<double>& nodes() const { return x_; }

    double operator()(double x) const {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            const double d = x - x_[j];
            if (d == 0.0) return y_[j];
            const double c = w_[j] / d;
            num += c * y_[j];
            den += c;
        }
        return num / den;
    }

    double derivative(double x) const {
        for (std::size_t k = 0; k < x_.size(); ++k) {
            if (x == x_[k]) return derivative_at_node(k);
        }
        const double px = (*this)(x);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            const double d = x - x_[j];
            const double c = w_[j] / d;
            num += c * (px - y_[j]) / d;
            den += c;
        }
        return num / den;
    }

    /// Derivative at node k; sums over differences y_j - y_k, so constant
    /// data yields exactly zero.
    double derivative_at_node(std::size_t k) const {
        double s = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            if (j == k) continue;
            s += (w_[j] / w_[k]) / (x_[k] - x_[j]) * (y_[j] - y_[k]);
        }
        return s;
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> w_;
};

/// Normalized histograms P_theta[T(t) in bin] on a shared (theta, t, bin) grid.
class DensityGrid {
public:
    DensityGrid(std::vector<double> thetas, std::vector<double> time, std::size_t bins,
                double max_T)
        : thetas_(std::move(thetas)),
          time_(std::move(time)),
          bins_(bins),
          max_T_(max_T),
          width_(max_T > 0.0 ? max_T / static_cast<double>(bins) : 1.0),
          mass_(thetas_.size() * time_.size() * bins, 0.0) {
        if (bins == 0) throw std::invalid_argument("DensityGrid: need at least one bin");
    }

    const std::vector<double>& thetas() const { return thetas_; }
    const std::vector<double>& time() const { return time_; }
    std::size_t bins() const { return bins_; }
    double max_T() const { return max_T_; }
    double bin_width() const { return width_; }

    std::size_t bin_of(double x) const {
        const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(x / width_)));
        return std::min(k, bins_ - 1);
    }

    double& at(std::size_t theta, std::size_t t, std::size_t bin) {
        return mass_[(theta * time_.size() + t) * bins_ + bin];
    }
    double at(std::size_t theta, std::size_t t, std::size_t bin) const {
        return mass_[(theta * time_.size() + t) * bins_ + bin];
    }

private:
    std::vector<double> thetas_;
    std::vector<double> time_;
    std::size_t bins_;
    double max_T_;
    double width_;
    std::vector<double> mass_;
};

/// Per-delay samples of T on a common time grid: samples[run][time index].
struct DelaySamples {
    double theta = 0.0;
    std::vector<double> time;
    std::vector<std::vector<double>> samples;
};

inline DelaySamples delay_samples(double theta, const EnsembleSummary& s) {
    return DelaySamples{theta, s.time, s.T_samples};
}

/// Histograms every (theta, t) over [0, max_T], max_T being the largest T
/// seen in any run for any delay.
inline DensityGrid build_density_grid(const std::vector<DelaySamples>& per_theta,
                                      std::size_t bins = 200) {
    if (per_theta.empty()) throw std::invalid_argument("build_density_grid: no delay values");
    const std::vector<double>& time = per_theta.front().time;
    double max_T = 0.0;
    std::vector<double> thetas;
    for (const DelaySamples& d : per_theta) {
        if (d.samples.empty()) {
            throw std::invalid_argument("build_density_grid: empty ensemble for a delay value");
        }
        if (d.time != time) throw std::invalid_argument("build_density_grid: time grids differ");
        for (const auto& row : d.samples) {
            if (row.size() != time.size()) {
                throw std::invalid_argument("build_density_grid: sample row length mismatch");
            }
            for (double v : row) max_T = std::max(max_T, v);
        }
        thetas.push_back(d.theta);
    }
    DensityGrid grid(thetas, time, bins, max_T);
    for (std::size_t k = 0; k < per_theta.size(); ++k) {
        const auto& rows = per_theta[k].samples;
        const double w = 1.0 / static_cast<double>(rows.size());
        for (const auto& row : rows) {
            for (std::size_t t = 0; t < time.size(); ++t) grid.at(k, t, grid.bin_of(row[t])) += w;
        }
    }
    return grid;
}

/// Polynomial in theta through P_theta_k[T(t) in bin] over all delay nodes.
inline LagrangePolynomial interpolate_in_theta(const DensityGrid& grid, std::size_t t,
                                               std::size_t bin) {
    std::vector<double> values(grid.thetas().size());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = grid.at(k, t, bin);
    return LagrangePolynomial(grid.thetas(), std::move(values));
}

struct SensitivitySurface {
    std::vector<double> thetas;
    std::vector<double> time;
    std::vector<std::vector<double>> S;   // S[t][theta index]
    std::vector<double> curve;            // integrated over theta, per t
};

/// Trapezoid rule of y over ascending-sorted x.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    double s = 0.0;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const std::size_t a = order[i - 1];
        const std::size_t b = order[i];
        s += 0.5 * (x[b] - x[a]) * (y[a] + y[b]);
    }
    return s;
}

inline SensitivitySurface sensitivity_surface(const DensityGrid& grid) {
    const auto& th = grid.thetas();
    const std::size_t D = th.size();
    if (D < 2) throw std::invalid_argument("sensitivity_surface: need at least two delay values");

    // node differentiation matrix: dp/dtheta(theta_k) = sum_j Dm[k][j] (y_j - y_k)
    const std::vector<double> w = LagrangePolynomial::barycentric_weights(th);
    std::vector<double> Dm(D * D, 0.0);
    for (std::size_t k = 0; k < D; ++k) {
        for (std::size_t j = 0; j < D; ++j) {
            if (j != k) Dm[k * D + j] = (w[j] / w[k]) / (th[k] - th[j]);
        }
    }

    SensitivitySurface out;
    out.thetas = th;
    out.time = grid.time();
    out.S.assign(out.time.size(), std::vector<double>(D, 0.0));
    out.curve.assign(out.time.size(), 0.0);
    std::vector<double> y(D);
    for (std::size_t t = 0; t < out.time.size(); ++t) {
        for (std::size_t x = 0; x < grid.bins(); ++x) {
            bool any = false;
            for (std::size_t k = 0; k < D; ++k) {
                y[k] = grid.at(k, t, x);
                any = any || y[k] != 0.0;
            }
            if (!any) continue;
            for (std::size_t k = 0; k < D; ++k) {
                if (y[k] == 0.0) continue;
                double d = 0.0;
                for (std::size_t j = 0; j < D; ++j) {
                    if (j != k) d += Dm[k * D + j] * (y[j] - y[k]);
                }
                out.S[t][k] += std::abs(d) * y[k];
            }
        }
        out.curve[t] = trapezoid(th, out.S[t]);
    }
    return out;
}

}  // namespace tisim
