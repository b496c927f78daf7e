#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "turmoil/error.hpp"
#include "turmoil/gnd.hpp"
#include "turmoil/optim.hpp"
#include "turmoil/returns.hpp"

namespace turmoil {

struct MgndComponent {
    double pi = 1.0;
    double mu = 0.0;
    double delta = 1.0;
    double nu = 2.0;

    [[nodiscard]] GndParams gnd() const { return {mu, delta, nu}; }
    [[nodiscard]] double sd() const { return std::sqrt(gnd_variance(delta, nu)); }

    friend bool operator==(const MgndComponent&, const MgndComponent&) = default;
};

/// K-component mixture of generalised normals.
struct MgndParams {
    std::vector<MgndComponent> components;

    [[nodiscard]] std::size_t k() const noexcept { return components.size(); }

    void validate() const {
        if (components.empty()) throw Error(ErrorCode::InvalidArgument, "mixture has no components");
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.pi > 0.0)) throw Error(ErrorCode::InvalidArgument, "mixture weight must be positive");
            c.gnd().validate();
            total += c.pi;
        }
        if (std::abs(total - 1.0) > 1e-10)
            throw Error(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
    }

    friend bool operator==(const MgndParams&, const MgndParams&) = default;
};

/// n x K matrix of posterior component probabilities.
using Posteriors = Eigen::MatrixXd;

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - mx);
    return mx + std::log(acc);
}

/// Evaluates log(pi_k) + log f_k(x) with the per-component constants hoisted.
class WeightedKernels {
public:
    explicit WeightedKernels(const MgndParams& p) : comps_(p.components) {
        for (const auto& c : comps_)
            log_const_.push_back(std::log(c.pi) + gnd_log_norm(c.nu) - std::log(c.delta));
    }

    void operator()(double x, std::vector<double>& out) const {
        out.resize(comps_.size());
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            const auto& c = comps_[k];
            out[k] = log_const_[k] - std::pow(std::abs((x - c.mu) / c.delta), c.nu);
        }
    }

private:
    std::vector<MgndComponent> comps_;
    std::vector<double> log_const_;
};

}  // namespace detail

inline double mgnd_pdf(double x, const MgndParams& p) {
    double acc = 0.0;
    for (const auto& c : p.components) acc += c.pi * gnd_pdf(x, c.gnd());
    return acc;
}

struct MgndDraws {
    std::vector<double> values;
    std::vector<std::size_t> components;
};

/// n i.i.d. draws from the mixture, with the generating component of each.
inline MgndDraws mgnd_sample(const MgndParams& p, std::size_t n, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    std::vector<double> w;
    for (const auto& c : p.components) w.push_back(c.pi);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    MgndDraws out;
    out.values.reserve(n);
    out.components.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = pick(rng);
        out.components.push_back(k);
        out.values.push_back(gnd_draw(p.components[k].gnd(), rng));
    }
    return out;
}

/// Observed-data log-likelihood.
inline double mgnd_loglik(std::span<const double> x, const MgndParams& p) {
    p.validate();
    const detail::WeightedKernels kernels(p);
    std::vector<double> lp;
    double ll = 0.0;
    for (double v : x) {
        kernels(v, lp);
        ll += detail::log_sum_exp(lp);
    }
    return ll;
}

/// E-step: row t is proportional to pi_k f_k(x_t), evaluated in log space.
inline Posteriors responsibilities(std::span<const double> x, const MgndParams& p) {
    p.validate();
    Posteriors post(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(p.k()));
    const detail::WeightedKernels kernels(p);
    std::vector<double> lp;
    for (std::size_t t = 0; t < x.size(); ++t) {
        kernels(x[t], lp);
        const double mx = *std::max_element(lp.begin(), lp.end());
        double total = 0.0;
        for (double& v : lp) total += (v = std::exp(v - mx));
        for (std::size_t k = 0; k < p.k(); ++k)
            post(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = lp[k] / total;
    }
    return post;
}

enum class InitStrategy {
    CoreTail,        // split on the upper 15% of |r - median|
    RandomRestarts,  // random responsibilities, best of several restarts
};

struct MgndFitOptions {
    std::size_t k = 2;
    InitStrategy init = InitStrategy::CoreTail;
    double tol = 1e-6;  // relative log-likelihood change
    std::size_t max_iter = 500;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
    std::size_t inner_iter = 30;
    double nu_min = 0.3;
    double nu_max = 5.0;
    double tail_fraction = 0.15;
    double min_weight = 1e-4;
    double delta_floor_ratio = 1e-4;  // times the sample standard deviation
};

struct MgndFitReport {
    MgndParams params;
    double loglik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> loglik_path;
    std::vector<bool> nu_at_boundary;
    std::size_t restarts_used = 1;
};

namespace detail {

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double sample_sd(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

struct WeightedGnd {
    double mu;
    double delta;
    double nu;
    double objective;  // weighted log-likelihood
    bool below_floor;
};

// For fixed (mu, nu) the weighted log-likelihood
//   sum w [ln nu - ln 2 - ln delta - lnGamma(1/nu)] - sum w |x - mu|^nu / delta^nu
// is maximised at delta^nu = nu S / W, S = sum w |x - mu|^nu, W = sum w.
inline WeightedGnd profile_delta(std::span<const double> x, const Eigen::VectorXd& w, double wsum,
                                 double mu, double nu, double delta_floor) {
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t)
        s += w(static_cast<Eigen::Index>(t)) * std::pow(std::abs(x[t] - mu), nu);
    double delta = std::pow(nu * s / wsum, 1.0 / nu);
    const bool below = !(delta >= delta_floor);
    if (below) delta = delta_floor;
    const double obj = wsum * (gnd_log_norm(nu) - std::log(delta)) - s / std::pow(delta, nu);
    return {mu, delta, nu, obj, below};
}

/// Generalised M-step for one component starting from `cur`; never returns
/// a weighted likelihood below that of `cur`.
inline MgndComponent maximise_component(std::span<const double> x, const Eigen::VectorXd& w,
                                        const MgndComponent& cur, double delta_floor,
                                        const MgndFitOptions& opts, std::size_t index) {
    const double wsum = w.sum();
    const double span_nu = opts.nu_max - opts.nu_min;
    const auto to_nu = [&](double t) { return opts.nu_min + span_nu * logistic(t); };
    const double nu0 = std::clamp(cur.nu, opts.nu_min + 1e-9 * span_nu, opts.nu_max - 1e-9 * span_nu);

    const auto objective = [&](const optim::Vector& v) {
        return -profile_delta(x, w, wsum, v(0), to_nu(v(1)), delta_floor).objective;
    };
    optim::Vector start(2), steps(2);
    start << cur.mu, logit((nu0 - opts.nu_min) / span_nu);
    steps << 0.1 * cur.delta, 0.25;
    const auto res = optim::nelder_mead(objective, start, steps, {opts.inner_iter, 1e-14});

    const auto best = profile_delta(x, w, wsum, res.x(0), to_nu(res.x(1)), delta_floor);
    if (best.below_floor)
        throw Error(ErrorCode::DegenerateComponent,
                    "component " + std::to_string(index + 1) + " scale collapsed below floor " +
                        std::to_string(delta_floor));
    return {wsum / static_cast<double>(x.size()), best.mu, best.delta, best.nu};
}

/// Moment-matched start (nu = 2, so delta = sigma * sqrt(2)) from weights.
inline MgndComponent moment_match(std::span<const double> x, const Eigen::VectorXd& w) {
    const double wsum = w.sum();
    double mean = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) mean += w(static_cast<Eigen::Index>(t)) * x[t];
    mean /= wsum;
    double var = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t)
        var += w(static_cast<Eigen::Index>(t)) * (x[t] - mean) * (x[t] - mean);
    var /= wsum;
    return {wsum / static_cast<double>(x.size()), mean, std::sqrt(2.0 * var), 2.0};
}

inline void check_components(const MgndParams& p, double delta_floor, double min_weight) {
    for (std::size_t k = 0; k < p.k(); ++k) {
        const auto& c = p.components[k];
        if (!(c.pi >= min_weight))
            throw Error(ErrorCode::DegenerateComponent,
                        "component " + std::to_string(k + 1) + " weight " + std::to_string(c.pi) +
                            " below " + std::to_string(min_weight));
        if (!(c.delta >= delta_floor))
            throw Error(ErrorCode::DegenerateComponent,
                        "component " + std::to_string(k + 1) + " scale below floor");
    }
}

inline void normalise_weights(MgndParams& p) {
    double total = 0.0;
    for (const auto& c : p.components) total += c.pi;
    for (auto& c : p.components) c.pi /= total;
}

}  // namespace detail

/// Deterministic start: observations are banded by |x - median|; the top
/// `tail_fraction` forms the last component and the core is split into K-1
/// equal bands. Each band is moment matched with nu = 2.
inline MgndParams initial_core_tail(std::span<const double> x, std::size_t k,
                                    double tail_fraction = 0.15) {
    const std::size_t n = x.size();
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(x[a] - median) < std::abs(x[b] - median);
    });

    MgndParams p;
    if (k == 1) {
        p.components.push_back(detail::moment_match(x, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))));
        return p;
    }
    const auto core_n = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - tail_fraction)));
    std::vector<std::size_t> band_end;
    for (std::size_t b = 1; b < k; ++b) band_end.push_back(core_n * b / (k - 1));
    band_end.push_back(n);
    std::size_t begin = 0;
    for (std::size_t b = 0; b < k; ++b) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = begin; i < band_end[b]; ++i) w(static_cast<Eigen::Index>(idx[i])) = 1.0;
        begin = band_end[b];
        if (w.sum() == 0.0) throw Error(ErrorCode::DegenerateComponent, "empty initial band");
        p.components.push_back(detail::moment_match(x, w));
    }
    return p;
}

namespace detail {

inline MgndFitReport run_em(std::span<const double> x, MgndParams params, double delta_floor,
                            const MgndFitOptions& opts) {
    check_components(params, delta_floor, opts.min_weight);
    normalise_weights(params);

    MgndFitReport rep;
    double ll = mgnd_loglik(x, params);
    if (!std::isfinite(ll)) throw NonFiniteError(0, "initial mixture log-likelihood");
    rep.loglik_path.push_back(ll);

    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        const Posteriors post = responsibilities(x, params);
        MgndParams next;
        for (std::size_t k = 0; k < params.k(); ++k) {
            const Eigen::VectorXd w = post.col(static_cast<Eigen::Index>(k));
            const double pi = w.sum() / static_cast<double>(x.size());
            if (!(pi >= opts.min_weight))
                throw Error(ErrorCode::DegenerateComponent,
                            "component " + std::to_string(k + 1) + " weight " + std::to_string(pi) +
                                " below " + std::to_string(opts.min_weight) + " at iteration " +
                                std::to_string(it));
            next.components.push_back(
                maximise_component(x, w, params.components[k], delta_floor, opts, k));
        }
        normalise_weights(next);

        const double ll_new = mgnd_loglik(x, next);
        if (!std::isfinite(ll_new)) throw NonFiniteError(it, "mixture log-likelihood");
        if (ll_new < ll - 1e-8 * std::max(1.0, std::abs(ll)))
            throw std::logic_error("EM log-likelihood decreased at iteration " + std::to_string(it));
        rep.loglik_path.push_back(ll_new);
        params = std::move(next);
        rep.iterations = it;
        const double rel = std::abs(ll_new - ll) / std::max(std::abs(ll), 1e-300);
        ll = ll_new;
        if (rel < opts.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.params = std::move(params);
    rep.loglik = ll;
    const double edge = 1e-3;
    for (const auto& c : rep.params.components)
        rep.nu_at_boundary.push_back(c.nu - opts.nu_min < edge || opts.nu_max - c.nu < edge);
    return rep;
}

}  // namespace detail

/// Maximum-likelihood MGND fit by EM. The M-step updates weights in closed
/// form and each (mu, delta, nu) with a bounded Nelder-Mead search over
/// (mu, logit nu), delta profiled out analytically.
inline MgndFitReport fit_mgnd(std::span<const double> x, const MgndFitOptions& opts = {}) {
    if (opts.k < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
    if (x.size() < 10 * opts.k)
        throw Error(ErrorCode::TooFewObservations,
                    "MGND fit needs at least " + std::to_string(10 * opts.k) + " observations");
    for (std::size_t t = 0; t < x.size(); ++t)
        if (!std::isfinite(x[t])) throw NonFiniteError(t, "input return");
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw Error(ErrorCode::DegenerateComponent, "series has zero dispersion");
    const double sd = detail::sample_sd(x);
    const double delta_floor = opts.delta_floor_ratio * sd;

    if (opts.init == InitStrategy::CoreTail)
        return detail::run_em(x, initial_core_tail(x, opts.k, opts.tail_fraction), delta_floor, opts);

    Rng rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::optional<MgndFitReport> best;
    std::optional<Error> last_error;
    const auto n = static_cast<Eigen::Index>(x.size());
    for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
        Eigen::MatrixXd resp(n, static_cast<Eigen::Index>(opts.k));
        for (Eigen::Index t = 0; t < n; ++t) {
            for (Eigen::Index k = 0; k < resp.cols(); ++k) resp(t, k) = unif(rng);
            resp.row(t) /= resp.row(t).sum();
        }
        MgndParams start;
        for (Eigen::Index k = 0; k < resp.cols(); ++k)
            start.components.push_back(detail::moment_match(x, resp.col(k)));
        try {
            auto rep = detail::run_em(x, start, delta_floor, opts);
            if (!best || rep.loglik > best->loglik) best = std::move(rep);
        } catch (const Error& e) {
            last_error = e;
        }
    }
    if (!best) throw *last_error;
    best->restarts_used = std::max<std::size_t>(opts.restarts, 1);
    return *best;
}

inline MgndFitReport fit_mgnd(const ReturnSeries& returns, const MgndFitOptions& opts = {}) {
    return fit_mgnd(returns.span(), opts);
}

/// Turmoil component of a two-component mixture: the larger per-component
/// standard deviation; ties (1e-12) go to the smaller shape, then the lower index.
inline std::size_t identify_turmoil_component(const MgndParams& p) {
    if (p.k() != 2)
        throw Error(ErrorCode::Unsupported, "turmoil identification is defined for K = 2 only");
    const auto& a = p.components[0];
    const auto& b = p.components[1];
    const double sa = a.sd(), sb = b.sd();
    if (std::abs(sa - sb) > 1e-12) return sb > sa ? 1 : 0;
    if (std::abs(a.nu - b.nu) > 1e-12) return b.nu < a.nu ? 1 : 0;
    return 0;
}

struct RegimeClassification {
    Posteriors posteriors;
    std::vector<std::size_t> labels;  // 0-based component index
    std::size_t turmoil_index = 0;
    std::vector<int> dummy;           // 1 where label == turmoil_index

    [[nodiscard]] double turmoil_share() const {
        if (dummy.empty()) return 0.0;
        return static_cast<double>(std::accumulate(dummy.begin(), dummy.end(), 0)) /
               static_cast<double>(dummy.size());
    }
};

/// Posterior-mode classification; exact ties go to the lower component index.
inline RegimeClassification classify(std::span<const double> x, const MgndParams& p) {
    RegimeClassification rc;
    rc.posteriors = responsibilities(x, p);
    rc.turmoil_index = identify_turmoil_component(p);
    rc.labels.resize(x.size());
    rc.dummy.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < p.k(); ++k)
            if (rc.posteriors(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) >
                rc.posteriors(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(best)))
                best = k;
        rc.labels[t] = best;
        rc.dummy[t] = best == rc.turmoil_index ? 1 : 0;
    }
    return rc;
}

inline DummySeries dummy_series(const ReturnSeries& returns, const RegimeClassification& rc,
                                const std::string& name = "TURMOIL") {
    if (rc.dummy.size() != returns.size())
        throw Error(ErrorCode::MisalignedSeries, "classification length differs from returns");
    return DummySeries(name, returns.dates(), std::vector<double>(rc.dummy.begin(), rc.dummy.end()));
}

}  // namespace turmoil
