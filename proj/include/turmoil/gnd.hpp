#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "turmoil/error.hpp"

namespace turmoil {

using Rng = std::mt19937_64;

/// Generalised normal distribution
///   f(x) = nu / (2 delta Gamma(1/nu)) * exp(-|(x - mu)/delta|^nu).
/// nu = 1 is the Laplace law, nu = 2 the normal kernel with variance delta^2/2.
struct GndParams {
    double mu = 0.0;
    double delta = 1.0;
    double nu = 2.0;

    void validate() const {
        if (!(delta > 0.0) || !std::isfinite(delta) || !(nu > 0.0) || !std::isfinite(nu) ||
            !std::isfinite(mu))
            throw Error(ErrorCode::InvalidArgument,
                        "GND parameters need finite mu, delta > 0, nu > 0");
    }
};

namespace detail {

/// Gamma((r + 1)/nu) / Gamma(1/nu): the r-th absolute moment of the unit-scale GND.
inline double gnd_unit_abs_moment(double r, double nu) {
    return std::tgamma((r + 1.0) / nu) / std::tgamma(1.0 / nu);
}

/// ln(nu / (2 Gamma(1/nu))), the log normalising constant at delta = 1.
inline double gnd_log_norm(double nu) {
    return std::log(nu) - std::log(2.0) - std::log(std::tgamma(1.0 / nu));
}

/// |Y| for a unit-scale GND: G^(1/nu), G ~ Gamma(1/nu, 1).
template <class Engine>
double draw_unit_gnd_abs(double nu, Engine& rng) {
    std::gamma_distribution<double> gamma(1.0 / nu, 1.0);
    return std::pow(gamma(rng), 1.0 / nu);
}

}  // namespace detail

inline double gnd_logpdf(double x, const GndParams& p) {
    p.validate();
    return detail::gnd_log_norm(p.nu) - std::log(p.delta) - std::pow(std::abs((x - p.mu) / p.delta), p.nu);
}

inline double gnd_pdf(double x, const GndParams& p) { return std::exp(gnd_logpdf(x, p)); }

inline double gnd_cdf(double x, const GndParams& p) {
    p.validate();
    const double u = (x - p.mu) / p.delta;
    const double half_mass = 0.5 * boost::math::gamma_p(1.0 / p.nu, std::pow(std::abs(u), p.nu));
    return u < 0.0 ? 0.5 - half_mass : 0.5 + half_mass;
}

/// delta^2 Gamma(3/nu) / Gamma(1/nu)
inline double gnd_variance(double delta, double nu) {
    GndParams{0.0, delta, nu}.validate();
    return delta * delta * detail::gnd_unit_abs_moment(2.0, nu);
}

/// E|X - mu| = delta Gamma(2/nu) / Gamma(1/nu)
inline double gnd_abs_moment(const GndParams& p) {
    p.validate();
    return p.delta * detail::gnd_unit_abs_moment(1.0, p.nu);
}

template <class Engine>
double gnd_draw(const GndParams& p, Engine& rng) {
    std::bernoulli_distribution sign(0.5);
    const double a = detail::draw_unit_gnd_abs(p.nu, rng);
    return p.mu + p.delta * (sign(rng) ? a : -a);
}

inline std::vector<double> gnd_sample(const GndParams& p, std::size_t n, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = gnd_draw(p, rng);
    return out;
}

/// Shape and skew of the standardized skewed GND innovation. s = 1 is symmetric;
/// s > 1 puts more mass on the right.
struct SkewGndParams {
    double nu = 2.0;
    double s = 1.0;

    void validate() const {
        if (!(nu > 0.0) || !std::isfinite(nu) || !(s > 0.0) || !std::isfinite(s))
            throw Error(ErrorCode::InvalidArgument, "skewed GND needs nu > 0, s > 0");
    }

    friend bool operator==(const SkewGndParams&, const SkewGndParams&) = default;
};

/// Zero-mean, unit-variance skewed GND.
///
/// A unit-scale symmetric GND Y is skewed two-piece style: X = s|Y| with
/// probability s^2/(1+s^2), otherwise X = -|Y|/s, giving density
///   f_X(x) = 2/(s + 1/s) * g(x/s)  for x >= 0,   2/(s + 1/s) * g(x s)  for x < 0.
/// The innovation is z = (X - m)/sigma with m, sigma the mean and standard
/// deviation of X. All constants are computed once at construction so the
/// object can be evaluated in tight likelihood loops.
class SkewGnd {
public:
    explicit SkewGnd(SkewGndParams p) : p_(p) {
        p_.validate();
        const double s = p_.s;
        const double m1 = detail::gnd_unit_abs_moment(1.0, p_.nu);
        const double m2 = detail::gnd_unit_abs_moment(2.0, p_.nu);
        weight_ = 2.0 / (s + 1.0 / s);
        mean_ = m1 * (s - 1.0 / s);
        const double raw2 = m2 * (s * s * s + 1.0 / (s * s * s)) / (s + 1.0 / s);
        sigma_ = std::sqrt(raw2 - mean_ * mean_);
        log_const_ = std::log(sigma_) + std::log(weight_) + detail::gnd_log_norm(p_.nu);
        expected_abs_ = compute_expected_abs(m1);
    }

    [[nodiscard]] const SkewGndParams& params() const noexcept { return p_; }
    [[nodiscard]] double raw_mean() const noexcept { return mean_; }
    [[nodiscard]] double raw_sd() const noexcept { return sigma_; }

    [[nodiscard]] double logpdf(double z) const noexcept {
        const double x = mean_ + sigma_ * z;
        const double scaled = x >= 0.0 ? x / p_.s : -x * p_.s;
        return log_const_ - std::pow(scaled, p_.nu);
    }

    [[nodiscard]] double cdf(double z) const {
        const double x = mean_ + sigma_ * z;
        const double s = p_.s;
        const double left = 1.0 / (1.0 + s * s);
        if (x < 0.0) {
            // weight * (1/s) * P(Y < x s), Y symmetric
            return left * (1.0 - boost::math::gamma_p(1.0 / p_.nu, std::pow(-x * s, p_.nu)));
        }
        return left + (1.0 - left) * boost::math::gamma_p(1.0 / p_.nu, std::pow(x / s, p_.nu));
    }

    /// E|z|, closed form through regularized incomplete gamma functions.
    [[nodiscard]] double expected_abs() const noexcept { return expected_abs_; }

    template <class Engine>
    double draw(Engine& rng) const {
        const double s = p_.s;
        std::bernoulli_distribution right(s * s / (1.0 + s * s));
        const double a = detail::draw_unit_gnd_abs(p_.nu, rng);
        const double x = right(rng) ? s * a : -a / s;
        return (x - mean_) / sigma_;
    }

private:
    // E|X - m| = 2 E[(m - X)^+]. With c = weight * nu / (2 Gamma(1/nu)) the
    // pieces reduce to
    //   c * int_0^u x^0 exp(-(x/a)^nu) dx = weight * a/2 * P(1/nu, (u/a)^nu)
    //   c * int_0^u x^1 exp(-(x/a)^nu) dx = weight * a^2/2 * M1 * P(2/nu, (u/a)^nu)
    // where a = s on the right half-line and a = 1/s on the left.
    [[nodiscard]] double compute_expected_abs(double m1) const {
        const double nu = p_.nu;
        const double s = p_.s;
        const auto i0 = [&](double a, double u) {
            const double p = std::isinf(u) ? 1.0 : boost::math::gamma_p(1.0 / nu, std::pow(u / a, nu));
            return weight_ * a * 0.5 * p;
        };
        const auto i1 = [&](double a, double u) {
            const double p = std::isinf(u) ? 1.0 : boost::math::gamma_p(2.0 / nu, std::pow(u / a, nu));
            return weight_ * a * a * 0.5 * m1 * p;
        };
        const double inf = std::numeric_limits<double>::infinity();
        const double m = mean_;
        double below;  // E[(m - X)^+]
        if (m >= 0.0) {
            below = m * i0(1.0 / s, inf) + i1(1.0 / s, inf);
            if (m > 0.0) below += m * i0(s, m) - i1(s, m);
        } else {
            const double u = -m;
            below = (i1(1.0 / s, inf) - i1(1.0 / s, u)) - u * (i0(1.0 / s, inf) - i0(1.0 / s, u));
        }
        return 2.0 * below / sigma_;
    }

    SkewGndParams p_;
    double weight_ = 1.0;
    double mean_ = 0.0;
    double sigma_ = 1.0;
    double log_const_ = 0.0;
    double expected_abs_ = 0.0;
};

inline double sgnd_logpdf(double z, const SkewGndParams& p) { return SkewGnd(p).logpdf(z); }

inline double sgnd_cdf(double z, const SkewGndParams& p) { return SkewGnd(p).cdf(z); }

inline double sgnd_expected_abs(const SkewGndParams& p) { return SkewGnd(p).expected_abs(); }

inline std::vector<double> sgnd_sample(const SkewGndParams& p, std::size_t n, std::uint64_t seed) {
    const SkewGnd dist(p);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& z : out) z = dist.draw(rng);
    return out;
}

}  // namespace turmoil
