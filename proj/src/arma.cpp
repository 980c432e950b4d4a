#include "motifcast/arma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "motifcast/common.hpp"

namespace motifcast::arma {
namespace {

constexpr double kStationarityMargin = 1e-6;

void check_series(std::span<const double> series) {
    for (double v : series) {
        if (!std::isfinite(v)) throw DataError("arma: series contains non-finite values");
    }
}

// Roots of 1 - sum phi_i z^i via the companion matrix of the monic form.
std::vector<std::complex<double>> ar_polynomial_roots(std::span<const double> phi) {
    std::vector<double> coeff(phi.size() + 1);  // coeff[i] multiplies z^i
    coeff[0] = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) coeff[i + 1] = -phi[i];
    std::size_t degree = coeff.size() - 1;
    while (degree > 0 && std::abs(coeff[degree]) < 1e-14) --degree;
    if (degree == 0) return {};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                      static_cast<Eigen::Index>(degree));
    for (std::size_t i = 1; i < degree; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    }
    for (std::size_t i = 0; i < degree; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(degree - 1)) =
            -coeff[i] / coeff[degree];
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots;
    roots.reserve(degree);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        roots.push_back(solver.eigenvalues()(i));
    }
    return roots;
}

// Rebuilds phi from prod_i (1 - z / root_i).
std::vector<double> ar_coeffs_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> poly{1.0};  // ascending powers of z
    for (const auto& root : roots) {
        std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
        const std::complex<double> factor = -1.0 / root;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] += poly[i] * factor;
        }
        poly = std::move(next);
    }
    std::vector<double> phi(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i) phi[i - 1] = -poly[i].real();
    return phi;
}

// Least squares via column-pivoting QR.
Eigen::VectorXd solve_ls(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
    return design.colPivHouseholderQr().solve(target);
}

// Long-AR innovations for the Hannan-Rissanen first stage; entries before the
// long-AR order are 0.
std::vector<double> long_ar_residuals(std::span<const double> series) {
    const std::size_t n = series.size();
    const std::size_t order = std::min<std::size_t>(20, n / 10);
    const std::size_t rows = n - order;
    Eigen::MatrixXd design(rows, order + 1);
    Eigen::VectorXd target(rows);
    for (std::size_t t = order; t < n; ++t) {
        const std::size_t r = t - order;
        target(static_cast<Eigen::Index>(r)) = series[t];
        design(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (std::size_t i = 1; i <= order; ++i) {
            design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = series[t - i];
        }
    }
    const Eigen::VectorXd beta = solve_ls(design, target);
    std::vector<double> residuals(n, 0.0);
    for (std::size_t t = order; t < n; ++t) {
        double fitted = beta(0);
        for (std::size_t i = 1; i <= order; ++i) {
            fitted += beta(static_cast<Eigen::Index>(i)) * series[t - i];
        }
        residuals[t] = series[t] - fitted;
    }
    return residuals;
}

double residual_variance(const ArmaModel& model, std::span<const double> series) {
    const std::vector<double> eps = one_step_residuals(model, series);
    const std::size_t start = static_cast<std::size_t>(std::max(model.p(), model.q()));
    if (eps.size() <= start) return 0.0;
    double sum = 0.0;
    for (std::size_t t = start; t < eps.size(); ++t) sum += eps[t] * eps[t];
    return sum / static_cast<double>(eps.size() - start);
}

}  // namespace

bool is_stationary(std::span<const double> ar_coeffs, double margin) {
    for (const auto& root : ar_polynomial_roots(ar_coeffs)) {
        if (std::abs(root) <= 1.0 + margin) return false;
    }
    return true;
}

ArmaModel fit_arma(std::span<const double> series, int p, int q) {
    if (p < 0 || q < 0 || p + q < 1) {
        throw DataError("arma: orders must satisfy p, q >= 0 and p + q >= 1");
    }
    const std::size_t min_length = 10 * static_cast<std::size_t>(p + q + 1);
    if (series.size() < min_length) {
        throw DataError("arma: series of length " + std::to_string(series.size()) +
                        " is too short for ARMA(" + std::to_string(p) + ", " +
                        std::to_string(q) + "); need >= " + std::to_string(min_length));
    }
    check_series(series);

    const std::size_t n = series.size();
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double variance = 0.0;
    for (double v : series) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(n);
    if (variance <= 1e-12 * std::max(1.0, mean * mean)) {
        ArmaModel model;
        model.intercept = mean;
        model.noise_variance = 0.0;
        model.mean_only = true;
        return model;
    }

    std::vector<double> innovations;
    std::size_t innovation_start = 0;
    if (q > 0) {
        innovations = long_ar_residuals(series);
        innovation_start = std::min<std::size_t>(20, n / 10);
    }

    const std::size_t t0 =
        std::max<std::size_t>(static_cast<std::size_t>(p), innovation_start + static_cast<std::size_t>(q));
    const std::size_t rows = n - t0;
    const int cols = 1 + p + q;
    if (rows < static_cast<std::size_t>(cols) + 1) {
        throw DataError("arma: not enough usable rows for the requested orders");
    }

    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    for (std::size_t t = t0; t < n; ++t) {
        const Eigen::Index r = static_cast<Eigen::Index>(t - t0);
        target(r) = series[t];
        design(r, 0) = 1.0;
        for (int i = 1; i <= p; ++i) {
            design(r, i) = series[t - static_cast<std::size_t>(i)];
        }
        for (int i = 1; i <= q; ++i) {
            design(r, p + i) = innovations[t - static_cast<std::size_t>(i)];
        }
    }
    const Eigen::VectorXd beta = solve_ls(design, target);

    ArmaModel model;
    model.intercept = beta(0);
    model.ar_coeffs.assign(beta.data() + 1, beta.data() + 1 + p);
    model.ma_coeffs.assign(beta.data() + 1 + p, beta.data() + 1 + p + q);

    if (!is_stationary(model.ar_coeffs, kStationarityMargin)) {
        auto roots = ar_polynomial_roots(model.ar_coeffs);
        for (auto& root : roots) {
            const double modulus = std::abs(root);
            if (modulus <= 1.0 + kStationarityMargin) {
                const double target_modulus =
                    std::max(modulus > 0.0 ? 1.0 / modulus : 2.0, 1.0 + 1e-5);
                root = modulus > 0.0 ? root * (target_modulus / modulus)
                                     : std::complex<double>(target_modulus, 0.0);
            }
        }
        model.ar_coeffs = ar_coeffs_from_roots(roots);
        model.ar_coeffs.resize(static_cast<std::size_t>(p), 0.0);
        model.stationarity_repaired = true;
    }

    model.noise_variance = residual_variance(model, series);
    return model;
}

double forecast_one_step(const ArmaModel& model, std::span<const double> history,
                         std::span<const double> residual_history) {
    if (history.size() < static_cast<std::size_t>(model.p())) {
        throw DataError("arma: history shorter than the AR order");
    }
    if (residual_history.size() < static_cast<std::size_t>(model.q())) {
        throw DataError("arma: residual history shorter than the MA order");
    }
    double forecast = model.intercept;
    for (int i = 1; i <= model.p(); ++i) {
        forecast += model.ar_coeffs[static_cast<std::size_t>(i - 1)] *
                    history[history.size() - static_cast<std::size_t>(i)];
    }
    for (int i = 1; i <= model.q(); ++i) {
        forecast += model.ma_coeffs[static_cast<std::size_t>(i - 1)] *
                    residual_history[residual_history.size() - static_cast<std::size_t>(i)];
    }
    return forecast;
}

std::vector<double> one_step_residuals(const ArmaModel& model, std::span<const double> series) {
    check_series(series);
    std::vector<double> residuals(series.size(), 0.0);
    const int p = model.p();
    const int q = model.q();
    for (std::size_t t = static_cast<std::size_t>(p); t < series.size(); ++t) {
        double fitted = model.intercept;
        for (int i = 1; i <= p; ++i) {
            fitted += model.ar_coeffs[static_cast<std::size_t>(i - 1)] *
                      series[t - static_cast<std::size_t>(i)];
        }
        for (int i = 1; i <= q; ++i) {
            if (t >= static_cast<std::size_t>(i)) {
                fitted += model.ma_coeffs[static_cast<std::size_t>(i - 1)] *
                          residuals[t - static_cast<std::size_t>(i)];
            }
        }
        residuals[t] = series[t] - fitted;
    }
    return residuals;
}

double aic(const ArmaModel& model, std::size_t sample_count) {
    const double variance = std::max(model.noise_variance, 1e-300);
    return static_cast<double>(sample_count) * std::log(variance) +
           2.0 * (model.p() + model.q() + 1);
}

std::pair<int, int> select_orders(std::span<const double> series, int max_p, int max_q) {
    if (max_p < 1 || max_q < 1) throw DataError("arma: max_p and max_q must be >= 1");
    double best_aic = std::numeric_limits<double>::infinity();
    int best_p = -1, best_q = -1;
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) {
            if (p + q < 1) continue;
            ArmaModel model;
            try {
                model = fit_arma(series, p, q);
            } catch (const DataError&) {
                continue;
            }
            const double score = aic(model, series.size());
            const bool better =
                score < best_aic ||
                (score == best_aic &&
                 (p + q < best_p + best_q || (p + q == best_p + best_q && p < best_p)));
            if (best_p < 0 || better) {
                best_aic = score;
                best_p = p;
                best_q = q;
            }
        }
    }
    if (best_p < 0) return {1, 0};
    return {best_p, best_q};
}

}  // namespace motifcast::arma
