#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace turmoil::optim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct NelderMeadOptions {
    std::size_t max_iter = 200;
    double ftol = 1e-12;  // relative spread of simplex values
};

struct NelderMeadResult {
    Vector x;
    double fx = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
};

/// Minimises `f` from `x0` with an initial simplex x0 + steps[i] e_i.
/// The returned point is never worse than x0.
template <class F>
NelderMeadResult nelder_mead(F&& f, const Vector& x0, const Vector& steps,
                             const NelderMeadOptions& opts = {}) {
    const Eigen::Index n = x0.size();
    std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> vals(pts.size());
    std::size_t evals = 0;
    const auto eval = [&](const Vector& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    vals[0] = eval(pts[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i + 1)](i) += steps(i);
        vals[static_cast<std::size_t>(i + 1)] = eval(pts[static_cast<std::size_t>(i + 1)]);
    }

    std::vector<std::size_t> order(pts.size());
    std::size_t it = 0;
    for (; it < opts.max_iter; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(),
                          second = order[order.size() - 2];
        if (std::isfinite(vals[worst]) &&
            std::abs(vals[worst] - vals[best]) <= opts.ftol * (std::abs(vals[best]) + 1e-300))
            break;

        Vector centroid = Vector::Zero(n);
        for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
        centroid /= static_cast<double>(n);

        const Vector xr = centroid + (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < vals[best]) {
            const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                  : Vector(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 1; k < order.size(); ++k) {
            auto& p = pts[order[k]];
            p = pts[best] + 0.5 * (p - pts[best]);
            vals[order[k]] = eval(p);
        }
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], it, evals};
}

/// Central-difference gradient with step h_i = rel_step * max(1, |x_i|).
template <class F>
Vector numerical_gradient(F&& f, const Vector& x, double rel_step = 1e-5) {
    Vector g(x.size());
    Vector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Central-difference Hessian with step h_i = rel_step * max(1, |x_i|).
template <class F>
Matrix numerical_hessian(F&& f, const Vector& x, double rel_step = 1e-4) {
    const Eigen::Index n = x.size();
    Matrix hess(n, n);
    Vector h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = rel_step * std::max(1.0, std::abs(x(i)));
    const double f0 = f(x);
    Vector xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        xp(i) = x(i) + h(i);
        const double fp = f(xp);
        xp(i) = x(i) - h(i);
        const double fm = f(xp);
        xp(i) = x(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
        for (Eigen::Index j = 0; j < i; ++j) {
            double acc = 0.0;
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    xp(i) = x(i) + si * h(i);
                    xp(j) = x(j) + sj * h(j);
                    acc += si * sj * f(xp);
                }
            xp(i) = x(i);
            xp(j) = x(j);
            hess(i, j) = hess(j, i) = acc / (4.0 * h(i) * h(j));
        }
    }
    return hess;
}

struct BfgsOptions {
    double grad_tol = 1e-5;       // max-norm of the gradient
    std::size_t max_iter = 1000;  // quasi-Newton iterations
    double fd_step = 1e-5;
    double max_step = 1.0;        // cap on the max-norm of a trial step
    double rel_ftol = 1e-12;      // step-size criterion on the objective
    double rel_xtol = 1e-10;      // step-size criterion on the parameters
};

struct BfgsResult {
    Vector x;
    double fx = 0.0;
    Vector gradient;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    bool stalled = false;  // line search could not improve
};

/// Quasi-Newton minimisation with an inverse-Hessian BFGS update, central
/// difference gradients and Armijo backtracking. Converged means the gradient
/// max-norm is below grad_tol, or a step-size criterion holds: the iterate and
/// objective stopped moving with the gradient within 100x of the tolerance, or
/// the line search fails and no coordinate probe at 1x or 10x the difference
/// step lowers the objective (a kink in the objective can leave a non-zero
/// difference gradient at the minimum). A probe that does improve becomes the
/// next iterate.
template <class F>
BfgsResult bfgs(F&& f, const Vector& x0, const BfgsOptions& opts = {}) {
    std::size_t evals = 0;
    const auto eval = [&](const Vector& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    const auto grad = [&](const Vector& x) { return numerical_gradient(eval, x, opts.fd_step); };

    const Eigen::Index n = x0.size();
    BfgsResult res;
    Vector x = x0;
    double fx = eval(x);
    Vector g = grad(x);
    Matrix hinv = Matrix::Identity(n, n);
    bool fresh = true;

    std::size_t it = 0;
    for (; it < opts.max_iter; ++it) {
        if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
            res.converged = true;
            break;
        }
        Vector d = -hinv * g;
        if (g.dot(d) >= 0.0) {
            hinv.setIdentity();
            fresh = true;
            d = -g;
        }
        const double dmax = d.lpNorm<Eigen::Infinity>();
        if (dmax > opts.max_step) d *= opts.max_step / dmax;

        double alpha = 1.0;
        Vector xn;
        double fn = std::numeric_limits<double>::infinity();
        const double slope = g.dot(d);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + alpha * d;
            fn = eval(xn);
            if (fn < fx && fn <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                hinv.setIdentity();
                fresh = true;
                continue;
            }
            Vector best = x;
            double fbest = fx;
            for (Eigen::Index i = 0; i < n; ++i)
                for (double scale : {1.0, 10.0})
                    for (double sign : {1.0, -1.0}) {
                        Vector xp = x;
                        xp(i) += sign * scale * opts.fd_step * std::max(1.0, std::abs(x(i)));
                        const double fp = eval(xp);
                        if (fp < fbest) {
                            fbest = fp;
                            best = xp;
                        }
                    }
            if (fbest < fx) {
                x = best;
                fx = fbest;
                g = grad(x);
                continue;
            }
            res.stalled = true;
            res.converged = true;
            break;
        }

        const Vector gn = grad(xn);
        const Vector s = xn - x;
        const Vector y = gn - g;
        const double sy = s.dot(y);
        const double df = fx - fn;
        x = xn;
        g = gn;
        const double fold = fx;
        fx = fn;

        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) hinv *= sy / y.squaredNorm();
            const double rho = 1.0 / sy;
            const Matrix eye = Matrix::Identity(n, n);
            hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) +
                   rho * s * s.transpose();
            fresh = false;
        }

        const bool small_f = df <= opts.rel_ftol * (1.0 + std::abs(fold));
        const bool small_x =
            s.lpNorm<Eigen::Infinity>() <= opts.rel_xtol * (1.0 + x.lpNorm<Eigen::Infinity>());
        if (small_f && small_x && g.lpNorm<Eigen::Infinity>() <= 100.0 * opts.grad_tol) {
            res.converged = true;
            ++it;
            break;
        }
    }
    res.x = x;
    res.fx = fx;
    res.gradient = g;
    res.iterations = it;
    res.evaluations = evals;
    return res;
}

}  // namespace turmoil::optim
