#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "turmoil/diagnostics.hpp"
#include "turmoil/error.hpp"
#include "turmoil/gnd.hpp"
#include "turmoil/optim.hpp"
#include "turmoil/returns.hpp"

namespace turmoil {

inline constexpr std::size_t kEgarchParamCount = 11;

inline constexpr std::array<const char*, kEgarchParamCount> kEgarchParamNames = {
    "mu", "m1", "phi1", "lambda", "omega", "v1", "alpha1", "gamma1", "beta1", "nu", "s"};

/// EGARCH(1,1)-in-mean with AR(1) and a 0/1 turmoil regressor D_t:
///   r_t       = mu + m1 D_t + phi1 r_{t-1} + lambda h_t + eps_t,   eps_t = h_t z_t
///   ln h_t^2  = omega + v1 D_t + alpha1 z_{t-1} + gamma1 (|z_{t-1}| - E|z|) + beta1 ln h_{t-1}^2
/// with z_t drawn from the standardized skewed GND.
struct EgarchMParams {
    double mu = 0.0;
    double m1 = 0.0;
    double phi1 = 0.0;
    double lambda = 0.0;
    double omega = 0.0;
    double v1 = 0.0;
    double alpha1 = 0.0;
    double gamma1 = 0.0;
    double beta1 = 0.0;
    SkewGndParams innovation{};

    void validate() const {
        for (double v : to_array())
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite EGARCH parameter");
        if (!(std::abs(beta1) < 1.0))
            throw Error(ErrorCode::InvalidArgument, "EGARCH persistence must satisfy |beta1| < 1");
        innovation.validate();
    }

    [[nodiscard]] std::array<double, kEgarchParamCount> to_array() const {
        return {mu, m1, phi1, lambda, omega, v1, alpha1, gamma1, beta1, innovation.nu, innovation.s};
    }

    static EgarchMParams from_array(std::span<const double> v) {
        if (v.size() != kEgarchParamCount)
            throw Error(ErrorCode::InvalidArgument, "EGARCH parameter vector must have 11 entries");
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], {v[9], v[10]}};
    }

    friend bool operator==(const EgarchMParams&, const EgarchMParams&) = default;
};

/// Recursion start. By default ln h_0^2 is the log sample variance of the
/// returns being filtered.
struct FilterInit {
    std::optional<double> log_h2_0;
};

/// Index 0 holds the initial state (h_0, z_0 = 0, eps_0 = 0); the likelihood
/// covers t = 1..n-1, with r_0 entering only as the AR lag.
struct FilterOutput {
    std::vector<double> h;
    std::vector<double> z;
    std::vector<double> eps;
    double loglik = 0.0;
    double log_h2_0 = 0.0;
};

namespace detail {

inline double sample_variance(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

inline void check_dummy(std::span<const double> returns, std::span<const double> dummy) {
    if (dummy.size() != returns.size())
        throw Error(ErrorCode::MisalignedSeries, "dummy length " + std::to_string(dummy.size()) +
                                                     " differs from returns length " +
                                                     std::to_string(returns.size()));
}

}  // namespace detail

inline FilterOutput filter(const EgarchMParams& p, std::span<const double> r,
                           std::span<const double> dummy, const FilterInit& init = {}) {
    p.validate();
    detail::check_dummy(r, dummy);
    const std::size_t n = r.size();
    if (n < 2) throw Error(ErrorCode::TooFewObservations, "filter needs at least 2 returns");

    const SkewGnd dist(p.innovation);
    const double e_abs = dist.expected_abs();
    FilterOutput out;
    out.h.resize(n);
    out.z.resize(n);
    out.eps.resize(n);
    out.log_h2_0 = init.log_h2_0 ? *init.log_h2_0 : std::log(detail::sample_variance(r));
    if (!std::isfinite(out.log_h2_0)) throw NonFiniteError(0, "initial log variance");

    double log_h2 = out.log_h2_0;
    out.h[0] = std::exp(0.5 * log_h2);
    out.z[0] = 0.0;
    out.eps[0] = 0.0;
    double ll = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double zp = out.z[t - 1];
        log_h2 = p.omega + p.v1 * dummy[t] + p.alpha1 * zp + p.gamma1 * (std::abs(zp) - e_abs) +
                 p.beta1 * log_h2;
        const double h = std::exp(0.5 * log_h2);
        const double eps = r[t] - p.mu - p.m1 * dummy[t] - p.phi1 * r[t - 1] - p.lambda * h;
        const double z = eps / h;
        if (!std::isfinite(log_h2) || !(h > 0.0) || !std::isfinite(h) || !std::isfinite(z))
            throw NonFiniteError(t, "EGARCH-M recursion");
        out.h[t] = h;
        out.eps[t] = eps;
        out.z[t] = z;
        ll += dist.logpdf(z) - 0.5 * log_h2;
    }
    if (!std::isfinite(ll)) throw NonFiniteError(n - 1, "EGARCH-M log-likelihood");
    out.loglik = ll;
    return out;
}

inline FilterOutput filter(const EgarchMParams& p, const ReturnSeries& r, const DummySeries& dummy,
                           const FilterInit& init = {}) {
    if (r.dates() != dummy.dates())
        throw Error(ErrorCode::MisalignedSeries, r.ticker() + ": dummy dates differ from return dates");
    return filter(p, r.span(), dummy.span(), init);
}

/// Maps between natural parameters and the unconstrained optimisation space:
/// beta1 = c tanh(x) with c just below 1, nu = 0.3 + exp(x), s = exp(x).
struct EgarchTransform {
    static constexpr double kBetaScale = 1.0 - 1e-9;
    static constexpr double kNuFloor = 0.3;

    static EgarchMParams constrain(std::span<const double> raw) {
        if (raw.size() != kEgarchParamCount)
            throw Error(ErrorCode::InvalidArgument, "raw EGARCH vector must have 11 entries");
        std::array<double, kEgarchParamCount> v{};
        std::copy(raw.begin(), raw.end(), v.begin());
        v[8] = kBetaScale * std::tanh(raw[8]);
        v[9] = kNuFloor + std::exp(raw[9]);
        v[10] = std::exp(raw[10]);
        return EgarchMParams::from_array(v);
    }

    static std::array<double, kEgarchParamCount> unconstrain(const EgarchMParams& p) {
        p.validate();
        if (!(p.innovation.nu > kNuFloor))
            throw Error(ErrorCode::InvalidArgument, "shape must exceed the 0.3 floor");
        auto v = p.to_array();
        v[8] = std::atanh(p.beta1 / kBetaScale);
        v[9] = std::log(p.innovation.nu - kNuFloor);
        v[10] = std::log(p.innovation.s);
        return v;
    }
};

/// Finite surrogate returned for parameter vectors whose recursion fails, so
/// finite differences never see inf - inf.
inline constexpr double kInfeasibleObjective = 1e100;

inline double neg_loglik(std::span<const double> raw, std::span<const double> r,
                         std::span<const double> dummy, const FilterInit& init = {}) {
    if (raw.size() != kEgarchParamCount)
        throw Error(ErrorCode::InvalidArgument, "raw EGARCH vector must have 11 entries");
    try {
        const double ll = filter(EgarchTransform::constrain(raw), r, dummy, init).loglik;
        return std::isfinite(ll) ? -ll : kInfeasibleObjective;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MisalignedSeries || e.code() == ErrorCode::TooFewObservations) throw;
        return kInfeasibleObjective;
    }
}

inline EgarchMParams default_start(std::span<const double> r) {
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    const double var = detail::sample_variance(r);
    EgarchMParams p;
    p.mu = mean;
    p.omega = std::log(var) * (1.0 - 0.95);
    p.alpha1 = -0.05;
    p.gamma1 = 0.1;
    p.beta1 = 0.95;
    p.innovation = {1.5, 1.0};
    return p;
}

struct EgarchFitOptions {
    std::optional<EgarchMParams> init;
    double grad_tol = 1e-5;
    std::size_t max_iter = 1000;
    std::uint64_t seed = 0;  // perturbed restart
    double restart_scale = 0.1;
};

struct EgarchFitReport {
    EgarchMParams params;
    std::array<std::optional<double>, kEgarchParamCount> std_errors{};
    std::array<std::optional<double>, kEgarchParamCount> p_values{};
    double loglik = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    double gradient_norm = 0.0;
    std::size_t n_obs = 0;
    double peak_volatility = 0.0;  // max h_t over t >= 1
    std::vector<std::string> warnings;
};

namespace detail {

// Inverse of the numerical Hessian of -loglik in the natural parameterisation.
// The |z| terms put kinks in the likelihood, so a Hessian that is not
// positive definite at the default step is retried with a wider and then a
// narrower step before the errors are declared undefined.
inline void fill_standard_errors(EgarchFitReport& rep, std::span<const double> r,
                                 std::span<const double> dummy) {
    const auto theta0 = rep.params.to_array();
    optim::Vector x0(static_cast<Eigen::Index>(kEgarchParamCount));
    for (std::size_t i = 0; i < kEgarchParamCount; ++i) x0(static_cast<Eigen::Index>(i)) = theta0[i];
    const auto objective = [&](const optim::Vector& x) {
        try {
            return -filter(EgarchMParams::from_array(std::span<const double>(x.data(), kEgarchParamCount)),
                           r, dummy)
                        .loglik;
        } catch (const Error&) {
            return kInfeasibleObjective;
        }
    };
    constexpr double kSteps[] = {1e-4, 1e-3, 1e-5};
    for (double step : kSteps) {
        optim::Matrix hess = optim::numerical_hessian(objective, x0, step);
        if (!hess.allFinite() || hess.cwiseAbs().maxCoeff() >= 1e90) continue;
        hess = 0.5 * (hess + hess.transpose()).eval();
        const Eigen::LLT<optim::Matrix> llt(hess);
        if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) continue;
        const optim::Matrix cov = llt.solve(optim::Matrix::Identity(hess.rows(), hess.cols()));
        for (std::size_t i = 0; i < kEgarchParamCount; ++i) {
            const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            if (!(v > 0.0) || !std::isfinite(v)) continue;
            const double se = std::sqrt(v);
            rep.std_errors[i] = se;
            rep.p_values[i] = std::erfc(std::abs(theta0[i]) / se / std::sqrt(2.0));
        }
        if (step != kSteps[0])
            rep.warnings.push_back("Hessian computed with relative step " + format_double(step));
        return;
    }
    rep.warnings.push_back("Hessian not positive definite; standard errors undefined");
}

}  // namespace detail

/// Maximum-likelihood fit: BFGS over the unconstrained parameterisation from
/// the default (or supplied) start, with one perturbed restart when the first
/// run does not converge. Standard errors come from the inverse numerical
/// Hessian at the optimum; p-values use the asymptotic normal approximation.
inline EgarchFitReport fit_egarch_m(std::span<const double> r, std::span<const double> dummy,
                                    const EgarchFitOptions& opts = {}) {
    detail::check_dummy(r, dummy);
    if (r.size() < 250) throw Error(ErrorCode::TooFewObservations, "EGARCH-M fit needs T >= 250");

    EgarchFitReport rep;
    rep.n_obs = r.size();
    if (r.size() < 500) rep.warnings.push_back("fewer than 500 observations");

    const EgarchMParams start = opts.init.value_or(default_start(r));
    const auto raw0 = EgarchTransform::unconstrain(start);
    optim::Vector x0(static_cast<Eigen::Index>(kEgarchParamCount));
    for (std::size_t i = 0; i < kEgarchParamCount; ++i) x0(static_cast<Eigen::Index>(i)) = raw0[i];

    const auto objective = [&](const optim::Vector& x) {
        return neg_loglik(std::span<const double>(x.data(), kEgarchParamCount), r, dummy);
    };
    optim::BfgsOptions bo;
    bo.grad_tol = opts.grad_tol;
    bo.max_iter = opts.max_iter;
    auto best = optim::bfgs(objective, x0, bo);

    if (!best.converged) {
        Rng rng(opts.seed);
        std::normal_distribution<double> noise(0.0, opts.restart_scale);
        optim::Vector x1 = best.x;
        for (Eigen::Index i = 0; i < x1.size(); ++i) x1(i) += noise(rng);
        auto retry = optim::bfgs(objective, x1, bo);
        retry.evaluations += best.evaluations;
        retry.iterations += best.iterations;
        if (retry.converged || retry.fx < best.fx) best = retry;
        rep.warnings.push_back("first optimiser run did not converge; restarted from perturbed start");
    }

    rep.params = EgarchTransform::constrain(std::span<const double>(best.x.data(), kEgarchParamCount));
    rep.converged = best.converged;
    rep.iterations = best.iterations;
    rep.evaluations = best.evaluations;
    rep.gradient_norm = best.gradient.lpNorm<Eigen::Infinity>();
    if (rep.converged && rep.gradient_norm > opts.grad_tol)
        rep.warnings.push_back("converged on the step-size criterion with gradient max-norm " +
                               format_double(rep.gradient_norm));
    const auto filtered = filter(rep.params, r, dummy);
    rep.loglik = filtered.loglik;
    rep.peak_volatility = *std::max_element(filtered.h.begin() + 1, filtered.h.end());
    detail::fill_standard_errors(rep, r, dummy);
    return rep;
}

inline EgarchFitReport fit_egarch_m(const ReturnSeries& r, const DummySeries& dummy,
                                    const EgarchFitOptions& opts = {}) {
    if (r.dates() != dummy.dates())
        throw Error(ErrorCode::MisalignedSeries, r.ticker() + ": dummy dates differ from return dates");
    return fit_egarch_m(r.span(), dummy.span(), opts);
}

struct SimulatedPath {
    std::vector<double> returns;
    std::vector<double> h;
    std::vector<double> z;
    double log_h2_0 = 0.0;
};

/// Runs the model forward. The start defaults to the stationary mean of
/// ln h^2 given the dummy average; z_0 = 0 and r_0 is its conditional mean,
/// so filter(params, returns, dummy, {log_h2_0}) reproduces h and z.
inline SimulatedPath simulate_egarch_m(const EgarchMParams& p, std::span<const double> dummy,
                                       std::size_t length, std::uint64_t seed,
                                       std::optional<double> log_h2_0 = std::nullopt) {
    p.validate();
    if (dummy.size() != length)
        throw Error(ErrorCode::MisalignedSeries, "dummy length must equal the simulated length");
    if (length < 2) throw Error(ErrorCode::TooFewObservations, "simulation needs length >= 2");
    for (double d : dummy)
        if (!IndicatorKind::valid(d)) throw Error(ErrorCode::InvalidArgument, "dummy must be 0/1");

    double dbar = 0.0;
    for (double d : dummy) dbar += d;
    dbar /= static_cast<double>(length);

    const SkewGnd dist(p.innovation);
    const double e_abs = dist.expected_abs();
    Rng rng(seed);

    SimulatedPath path;
    path.returns.resize(length);
    path.h.resize(length);
    path.z.resize(length);
    path.log_h2_0 = log_h2_0.value_or((p.omega + p.v1 * dbar) / (1.0 - p.beta1));
    double log_h2 = path.log_h2_0;
    path.h[0] = std::exp(0.5 * log_h2);
    path.z[0] = 0.0;
    path.returns[0] = p.mu + p.m1 * dummy[0] + p.lambda * path.h[0];
    for (std::size_t t = 1; t < length; ++t) {
        const double zp = path.z[t - 1];
        log_h2 = p.omega + p.v1 * dummy[t] + p.alpha1 * zp + p.gamma1 * (std::abs(zp) - e_abs) +
                 p.beta1 * log_h2;
        const double h = std::exp(0.5 * log_h2);
        const double z = dist.draw(rng);
        path.h[t] = h;
        path.z[t] = z;
        path.returns[t] =
            p.mu + p.m1 * dummy[t] + p.phi1 * path.returns[t - 1] + p.lambda * h + h * z;
    }
    return path;
}

struct ImpactRow {
    std::string ticker;
    double m1 = 0.0;
    std::optional<double> m1_p_value;
    std::string m1_stars;
    double v1 = 0.0;
    std::optional<double> v1_p_value;
    std::string v1_stars;
    double peak_volatility = 0.0;
};

struct NamedFit {
    std::string ticker;
    EgarchFitReport report;
};

/// Turmoil effects on mean (m1) and volatility (v1) plus peak filtered
/// volatility, one row per index.
inline std::vector<ImpactRow> turmoil_impact_summary(std::span<const NamedFit> fits) {
    if (fits.empty()) throw Error(ErrorCode::InvalidArgument, "impact summary needs at least one fit");
    std::vector<ImpactRow> rows;
    for (const auto& f : fits) {
        const auto& rep = f.report;
        ImpactRow row;
        row.ticker = f.ticker;
        row.m1 = rep.params.m1;
        row.m1_p_value = rep.p_values[1];
        row.m1_stars = rep.p_values[1] ? significance_stars(*rep.p_values[1]) : "";
        row.v1 = rep.params.v1;
        row.v1_p_value = rep.p_values[5];
        row.v1_stars = rep.p_values[5] ? significance_stars(*rep.p_values[5]) : "";
        row.peak_volatility = rep.peak_volatility;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace turmoil
