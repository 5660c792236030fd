// Test-only oracles, kept independent of the library's computation paths:
// incomplete-gamma chi-square tail, exact multivariate-hypergeometric pmf,
// and a finite-difference gradient that only ever calls the loss.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "annosim/matrix.hpp"
#include "annosim/model.hpp"
#include "annosim/targets.hpp"

namespace oracles {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

// P(Chi2_df >= statistic)
inline double chi2_survival(double statistic, int df) {
    return gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

inline double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(drawn counts == d) when drawing k annotations without replacement from a
// pool with class counts c: prod_j C(c_j, d_j) / C(M, k).
inline double hypergeom_pmf(std::span<const int> pool_counts, std::span<const int> drawn) {
    int m = 0, k = 0;
    double log_num = 0.0;
    for (std::size_t j = 0; j < pool_counts.size(); ++j) {
        if (drawn[j] < 0 || drawn[j] > pool_counts[j]) return 0.0;
        m += pool_counts[j];
        k += drawn[j];
        log_num += log_binomial(pool_counts[j], drawn[j]);
    }
    return std::exp(log_num - log_binomial(m, k));
}

// All drawn-count vectors d with sum k and d_j <= c_j.
inline void enumerate_draws(std::span<const int> pool_counts, int k,
                            std::vector<std::vector<int>>& out) {
    std::vector<int> current(pool_counts.size(), 0);
    const std::size_t c = pool_counts.size();
    auto rec = [&](auto&& self, std::size_t idx, int remaining) -> void {
        if (idx + 1 == c) {
            if (remaining <= pool_counts[idx]) {
                current[idx] = remaining;
                out.push_back(current);
            }
            return;
        }
        const int upper = std::min(pool_counts[idx], remaining);
        for (int d = 0; d <= upper; ++d) {
            current[idx] = d;
            self(self, idx + 1, remaining - d);
        }
    };
    rec(rec, 0, k);
}

// Pearson chi-square statistic over observed category counts.
inline double chi2_statistic(std::span<const long long> observed,
                             std::span<const double> expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = static_cast<double>(observed[i]) - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

struct FdGradient {
    annosim::Matrix grad_weights;
    std::vector<double> grad_bias;
};

// Central finite differences of the mean cross-entropy; touches only the
// loss evaluation, never the analytic gradient.
inline FdGradient fd_gradient(const annosim::ModelState& model, const annosim::Matrix& features,
                              const annosim::TrainTargets& targets, double h) {
    annosim::ModelState probe = model;
    FdGradient out;
    out.grad_weights = annosim::Matrix(model.weights.rows, model.weights.cols);
    out.grad_bias.assign(model.bias.size(), 0.0);
    for (std::size_t i = 0; i < model.weights.data.size(); ++i) {
        probe.weights.data[i] = model.weights.data[i] + h;
        const double up = annosim::mean_cross_entropy(probe, features, targets);
        probe.weights.data[i] = model.weights.data[i] - h;
        const double down = annosim::mean_cross_entropy(probe, features, targets);
        probe.weights.data[i] = model.weights.data[i];
        out.grad_weights.data[i] = (up - down) / (2.0 * h);
    }
    for (std::size_t i = 0; i < model.bias.size(); ++i) {
        probe.bias[i] = model.bias[i] + h;
        const double up = annosim::mean_cross_entropy(probe, features, targets);
        probe.bias[i] = model.bias[i] - h;
        const double down = annosim::mean_cross_entropy(probe, features, targets);
        probe.bias[i] = model.bias[i];
        out.grad_bias[i] = (up - down) / (2.0 * h);
    }
    return out;
}

}  // namespace oracles
