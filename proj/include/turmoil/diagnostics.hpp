#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "turmoil/data/mackinnon_1994.hpp"
#include "turmoil/error.hpp"
#include "turmoil/returns.hpp"

namespace turmoil {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<std::size_t> lags;
    bool reject_1pct = false;
    bool reject_5pct = false;
};

/// "**" below 1%, "*" below 5%, otherwise empty.
inline std::string significance_stars(double p_value) {
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    return "";
}

inline double chi_squared_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace detail {

inline TestResult make_result(double stat, double p, std::optional<std::size_t> lags) {
    p = std::clamp(p, 0.0, 1.0);
    return {stat, p, lags, p < 0.01, p < 0.05};
}

struct OlsFit {
    Eigen::VectorXd beta;
    double ssr = 0.0;
    Eigen::MatrixXd xtx_inv;
};

// Normal-equation OLS on the leading `k` columns of precomputed cross products.
inline OlsFit ols_from_cross(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty, double yty,
                             Eigen::Index k) {
    const Eigen::MatrixXd a = xtx.topLeftCorner(k, k);
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13))
        throw Error(ErrorCode::SingularMatrix, "regression cross-product matrix is singular");
    OlsFit fit;
    fit.beta = llt.solve(xty.head(k));
    fit.ssr = std::max(yty - fit.beta.dot(xty.head(k)), 0.0);
    fit.xtx_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    return fit;
}

}  // namespace detail

/// JB = n (S^2/6 + K_excess^2/24), chi-squared(2) p-value; moment-ratio S and K.
inline TestResult jarque_bera(std::span<const double> x) {
    if (x.size() < 8) throw Error(ErrorCode::TooFewObservations, "Jarque-Bera needs n >= 8");
    const auto s = summary_stats(x);
    if (!s.skewness) throw Error(ErrorCode::InvalidArgument, "Jarque-Bera undefined for a constant series");
    const double n = static_cast<double>(x.size());
    const double stat = n * (*s.skewness * *s.skewness / 6.0 +
                             *s.excess_kurtosis * *s.excess_kurtosis / 24.0);
    return detail::make_result(stat, chi_squared_sf(stat, 2.0), std::nullopt);
}

/// Asymptotic p-value of the constant-only Dickey-Fuller tau statistic.
inline double mackinnon_pvalue(double tau) {
    namespace mk = data::mackinnon_1994;
    if (tau > mk::kTauMax) return 1.0;
    if (tau < mk::kTauMin) return 0.0;
    const auto poly = [tau](std::span<const double> c) {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * tau + c[i];
        return acc;
    };
    return normal_cdf(tau <= mk::kTauStar ? poly(mk::kSmallP) : poly(mk::kLargeP));
}

/// Schwert rule floor(12 (n/100)^(1/4)).
inline std::size_t schwert_max_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

/// Augmented Dickey-Fuller test with a constant and no trend:
///   dy_t = a + rho y_{t-1} + sum_{i=1..p} g_i dy_{t-i} + e_t.
/// The lag order p <= max_lag minimises AIC on the common sample; the
/// statistic is the t-ratio of rho re-estimated on the full sample for p.
inline TestResult adf_test(std::span<const double> y, std::optional<std::size_t> max_lag = std::nullopt) {
    const std::size_t n = y.size();
    const std::size_t pmax = max_lag.value_or(schwert_max_lag(n));
    if (n < 25 + pmax)
        throw Error(ErrorCode::TooFewObservations, "ADF needs n >= 25 + max_lag");

    std::vector<double> dy(n, 0.0);  // dy[t] = y[t] - y[t-1], t >= 1
    for (std::size_t t = 1; t < n; ++t) dy[t] = y[t] - y[t - 1];

    // Cross products for regressions over t in [first, n).
    const auto cross = [&](std::size_t p, std::size_t first, Eigen::MatrixXd& xtx,
                           Eigen::VectorXd& xty, double& yty) {
        const auto m = static_cast<Eigen::Index>(p + 2);
        xtx = Eigen::MatrixXd::Zero(m, m);
        xty = Eigen::VectorXd::Zero(m);
        yty = 0.0;
        Eigen::VectorXd row(m);
        for (std::size_t t = first; t < n; ++t) {
            row(0) = 1.0;
            row(1) = y[t - 1];
            for (std::size_t i = 1; i <= p; ++i) row(static_cast<Eigen::Index>(i + 1)) = dy[t - i];
            xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
            xty += dy[t] * row;
            yty += dy[t] * dy[t];
        }
        xtx = xtx.selfadjointView<Eigen::Lower>();
    };

    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0;
    std::size_t best_p = 0;
    if (pmax > 0) {
        cross(pmax, pmax + 1, xtx, xty, yty);
        const double nobs = static_cast<double>(n - pmax - 1);
        double best_aic = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p <= pmax; ++p) {
            const auto k = static_cast<Eigen::Index>(p + 2);
            const auto fit = detail::ols_from_cross(xtx, xty, yty, k);
            const double aic = nobs * std::log(fit.ssr / nobs) + 2.0 * static_cast<double>(k);
            if (aic < best_aic) {
                best_aic = aic;
                best_p = p;
            }
        }
    }

    cross(best_p, best_p + 1, xtx, xty, yty);
    const auto k = static_cast<Eigen::Index>(best_p + 2);
    const auto fit = detail::ols_from_cross(xtx, xty, yty, k);
    const double nobs = static_cast<double>(n - best_p - 1);
    const double sigma2 = fit.ssr / (nobs - static_cast<double>(k));
    const double se = std::sqrt(sigma2 * fit.xtx_inv(1, 1));
    if (!(se > 0.0)) throw Error(ErrorCode::SingularMatrix, "ADF regression has zero residual variance");
    const double tau = fit.beta(1) / se;
    return detail::make_result(tau, mackinnon_pvalue(tau), best_p);
}

/// Engle's ARCH-LM test on demeaned returns: regress e_t^2 on a constant and
/// `lags` own lags; LM = n_eff R^2 ~ chi-squared(lags).
inline TestResult arch_lm(std::span<const double> x, std::size_t lags = 12) {
    const std::size_t n = x.size();
    if (lags == 0) throw Error(ErrorCode::InvalidArgument, "ARCH-LM needs at least one lag");
    if (n < 5 * lags) throw Error(ErrorCode::TooFewObservations, "ARCH-LM needs n >= 5 * lags");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> u(n);
    for (std::size_t t = 0; t < n; ++t) u[t] = (x[t] - mean) * (x[t] - mean);

    const auto m = static_cast<Eigen::Index>(lags + 1);
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(m);
    double yty = 0.0, ysum = 0.0;
    Eigen::VectorXd row(m);
    for (std::size_t t = lags; t < n; ++t) {
        row(0) = 1.0;
        for (std::size_t i = 1; i <= lags; ++i) row(static_cast<Eigen::Index>(i)) = u[t - i];
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
        xty += u[t] * row;
        yty += u[t] * u[t];
        ysum += u[t];
    }
    xtx = xtx.selfadjointView<Eigen::Lower>();
    const auto fit = detail::ols_from_cross(xtx, xty, yty, m);
    const double n_eff = static_cast<double>(n - lags);
    const double sst = yty - ysum * ysum / n_eff;
    if (!(sst > 0.0)) throw Error(ErrorCode::SingularMatrix, "ARCH-LM dependent variable is constant");
    const double r2 = 1.0 - fit.ssr / sst;
    const double stat = n_eff * r2;
    return detail::make_result(stat, chi_squared_sf(stat, static_cast<double>(lags)), lags);
}

inline TestResult jarque_bera(const ReturnSeries& r) { return jarque_bera(r.span()); }
inline TestResult adf_test(const ReturnSeries& r, std::optional<std::size_t> max_lag = std::nullopt) {
    return adf_test(r.span(), max_lag);
}
inline TestResult arch_lm(const ReturnSeries& r, std::size_t lags = 12) { return arch_lm(r.span(), lags); }

}  // namespace turmoil
