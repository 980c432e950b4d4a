#pragma once

#include <span>
#include <utility>
#include <vector>

namespace motifcast::arma {

// ARMA(p, q) with intercept: x_t = c + eps_t + sum phi_i x_{t-i} +
// sum lambda_i eps_{t-i}. Orders are implied by the coefficient arrays.
struct ArmaModel {
    double intercept = 0.0;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double noise_variance = 0.0;
    bool mean_only = false;              // degenerate constant-series fallback
    bool stationarity_repaired = false;  // AR roots were reflected outside the unit circle

    int p() const { return static_cast<int>(ar_coeffs.size()); }
    int q() const { return static_cast<int>(ma_coeffs.size()); }
};

// True when every root of 1 - sum phi_i z^i lies outside the unit circle by
// the given margin.
bool is_stationary(std::span<const double> ar_coeffs, double margin = 1e-6);

// Two-stage Hannan-Rissanen least-squares fit: a long autoregression
// estimates the innovations, then the series is regressed on its own lags and
// the innovation lags. A non-stationary AR polynomial is repaired by
// reflecting offending roots outside the unit circle.
ArmaModel fit_arma(std::span<const double> series, int p, int q);

// c + sum phi_i x_{t-i} + sum lambda_i eps_{t-i}; the future innovation is
// taken at its expectation 0. history and residual_history end at t-1.
double forecast_one_step(const ArmaModel& model, std::span<const double> history,
                         std::span<const double> residual_history);

// Companion update: the causal one-step innovation sequence of the model on a
// series. Residuals before index p are 0; unavailable residual lags are 0.
std::vector<double> one_step_residuals(const ArmaModel& model, std::span<const double> series);

// n * ln(noise_variance) + 2 (p + q + 1).
double aic(const ArmaModel& model, std::size_t sample_count);

// Grid search over 0 <= p <= max_p, 0 <= q <= max_q with p + q >= 1,
// minimizing AIC; ties break toward smaller p + q, then smaller p. Falls back
// to (1, 0) when every fit fails.
std::pair<int, int> select_orders(std::span<const double> series, int max_p, int max_q);

}  // namespace motifcast::arma
