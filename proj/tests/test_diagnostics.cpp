#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "turmoil/csv.hpp"
#include "turmoil/diagnostics.hpp"

using namespace turmoil;
using Catch::Approx;

namespace {

struct Reference {
    std::vector<double> garch;
    std::vector<double> walk;
};

// 600-point fixture; statistics below were frozen with statsmodels 0.15
// (jarque_bera, adfuller(regression="c", autolag="AIC"), het_arch) by
// tests/data/make_reference.py.
const Reference& reference() {
    static const Reference ref = [] {
        const auto table = read_csv(std::string(TURMOIL_TEST_DATA_DIR) + "/reference_series.csv");
        Reference r;
        for (const auto& row : table.rows) {
            r.garch.push_back(*parse_double(row[1]));
            r.walk.push_back(*parse_double(row[2]));
        }
        return r;
    }();
    return ref;
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> x(n);
    for (auto& v : x) v = z(rng);
    return x;
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto x = normal_sample(n, seed);
    for (std::size_t t = 1; t < n; ++t) x[t] += x[t - 1];
    return x;
}

std::vector<double> garch11(std::size_t n, double omega, double alpha, double beta, std::uint64_t seed) {
    const auto z = normal_sample(n + 500, seed);
    std::vector<double> x;
    double h2 = omega / (1.0 - alpha - beta), prev = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        h2 = omega + alpha * prev * prev + beta * h2;
        prev = std::sqrt(h2) * z[t];
        if (t >= 500) x.push_back(prev);
    }
    return x;
}

// Independent OLS t-ratio via Householder QR on the explicit design matrix.
double qr_t_ratio(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::Index j) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::VectorXd b = qr.solve(y);
    const Eigen::VectorXd e = y - X * b;
    const double s2 = e.squaredNorm() / static_cast<double>(X.rows() - X.cols());
    const Eigen::MatrixXd inv = (X.transpose() * X).inverse();
    return b(j) / std::sqrt(s2 * inv(j, j));
}

}  // namespace

TEST_CASE("significance_stars", "[diagnostics]") {
    CHECK(significance_stars(0.0001) == "**");
    CHECK(significance_stars(0.0099) == "**");
    CHECK(significance_stars(0.01) == "*");
    CHECK(significance_stars(0.049) == "*");
    CHECK(significance_stars(0.05).empty());
    CHECK(significance_stars(0.7).empty());
}

TEST_CASE("chi_squared_sf", "[diagnostics]") {
    // chi2(2) survival is exp(-x/2).
    for (double x : {0.0, 0.3, 2.0, 9.21, 50.0}) CHECK(chi_squared_sf(x, 2.0) == Approx(std::exp(-x / 2)).epsilon(1e-14));
    CHECK(chi_squared_sf(3.841458820694124, 1.0) == Approx(0.05).epsilon(1e-12));
    CHECK(chi_squared_sf(26.21696730553585, 12.0) == Approx(0.01).epsilon(1e-10));
    // Monotone decreasing in the statistic.
    double prev = 1.0;
    for (double x = 0.0; x < 80.0; x += 0.5) {
        const double p = chi_squared_sf(x, 12.0);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("jarque_bera", "[diagnostics]") {
    SECTION("symmetric, mesokurtic design gives zero") {
        // Symmetric, so S = 0; two-point +-1 plus zeros tuned so K = 3:
        // m2 = 2a/n, m4 = 2a/n, K = n/(2a) = 3 for n = 6, a = 1.
        const std::vector<double> x{-1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 1};
        const auto r = jarque_bera(x);
        CHECK(r.statistic == Approx(0.0).margin(1e-12));
        CHECK(r.p_value == Approx(1.0).margin(1e-12));
        CHECK_FALSE(r.reject_5pct);
    }
    SECTION("formula arithmetic") {
        // n = 600, S = 0.5, K_excess = 1 gives 600 (0.25/6 + 1/24) = 50.
        CHECK(600.0 * (0.25 / 6.0 + 1.0 / 24.0) == Approx(50.0).epsilon(1e-15));
        const auto& x = reference().garch;
        const auto s = summary_stats(x);
        const double n = static_cast<double>(x.size());
        CHECK(jarque_bera(x).statistic ==
              Approx(n * (*s.skewness * *s.skewness / 6 + *s.excess_kurtosis * *s.excess_kurtosis / 24))
                  .epsilon(1e-14));
    }
    SECTION("statsmodels reference") {
        const auto g = jarque_bera(reference().garch);
        CHECK(g.statistic == Approx(31.790991183907618).epsilon(1e-10));
        CHECK(g.p_value == Approx(1.249320819194368e-07).epsilon(1e-8));
        CHECK(g.reject_1pct);
        CHECK(jarque_bera(reference().walk).statistic == Approx(54.27830230631127).epsilon(1e-10));
    }
    CHECK_THROWS_AS(jarque_bera(std::vector<double>{1, 2, 3, 4, 5, 6, 7}), Error);
}

TEST_CASE("mackinnon_pvalue", "[diagnostics]") {
    CHECK(mackinnon_pvalue(-17.73) == Approx(3.438271662891944e-30).epsilon(1e-9));
    CHECK(mackinnon_pvalue(-3.0) == Approx(0.034894400275345266).epsilon(1e-12));
    CHECK(mackinnon_pvalue(-2.0) == Approx(0.28657309916843154).epsilon(1e-12));
    CHECK(mackinnon_pvalue(0.5) == Approx(0.9848730963065522).epsilon(1e-12));
    CHECK(mackinnon_pvalue(3.0) == 1.0);
    CHECK(mackinnon_pvalue(-20.0) == 0.0);
    // Familiar asymptotic 5% critical value of tau_c.
    CHECK(mackinnon_pvalue(-2.8621) == Approx(0.05).margin(2e-3));
    double prev = 0.0;
    for (double tau = -18.0; tau < 2.7; tau += 0.01) {
        const double p = mackinnon_pvalue(tau);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("adf_test", "[diagnostics]") {
    const auto& ref = reference();

    SECTION("Schwert rule") {
        CHECK(schwert_max_lag(100) == 12);
        CHECK(schwert_max_lag(600) == 18);
        CHECK(schwert_max_lag(10000) == 37);
    }
    SECTION("statsmodels reference, AIC lag selection") {
        // statsmodels rounds the Schwert bound up (19 here); pass it explicitly.
        const auto a = adf_test(ref.garch, 19);
        CHECK(*a.lags == 7);
        CHECK(a.statistic == Approx(-9.299143599493467).epsilon(1e-9));
        CHECK(a.p_value == Approx(1.1247820563739688e-15).epsilon(1e-6));
        CHECK(a.reject_1pct);
        const auto b = adf_test(ref.garch, 4);
        CHECK(*b.lags == 2);
        CHECK(b.statistic == Approx(-11.51614430162154).epsilon(1e-9));
        const auto w = adf_test(ref.walk, 19);
        CHECK(*w.lags == 0);
        CHECK(w.statistic == Approx(-1.98340149551797).epsilon(1e-9));
        CHECK(w.p_value == Approx(0.2938980501329785).epsilon(1e-9));
        CHECK_FALSE(w.reject_5pct);
    }
    SECTION("t-ratio matches a QR regression at the chosen lag") {
        const auto& y = ref.garch;
        const auto res = adf_test(y, 6);
        const std::size_t p = *res.lags;
        const auto rows = static_cast<Eigen::Index>(y.size() - p - 1);
        Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(p + 2));
        Eigen::VectorXd dy(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t t = static_cast<std::size_t>(r) + p + 1;
            dy(r) = y[t] - y[t - 1];
            X(r, 0) = 1.0;
            X(r, 1) = y[t - 1];
            for (std::size_t i = 1; i <= p; ++i)
                X(r, static_cast<Eigen::Index>(i + 1)) = y[t - i] - y[t - i - 1];
        }
        CHECK(res.statistic == Approx(qr_t_ratio(X, dy, 1)).epsilon(1e-9));
    }
    SECTION("shift invariance") {
        auto shifted = ref.garch;
        for (auto& v : shifted) v += 123.4;
        const auto a = adf_test(ref.garch);
        const auto b = adf_test(shifted);
        CHECK(a.lags == b.lags);
        CHECK(b.statistic == Approx(a.statistic).epsilon(1e-8));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(adf_test(std::vector<double>(30, 1.0), 6), Error);
        std::vector<double> line(100);
        for (std::size_t t = 0; t < line.size(); ++t) line[t] = 0.5 * static_cast<double>(t);
        try {
            adf_test(line, 2);
            FAIL("expected singular regression");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SingularMatrix);
        }
    }
}

TEST_CASE("arch_lm", "[diagnostics]") {
    const auto& ref = reference();

    SECTION("statsmodels reference") {
        const auto a = arch_lm(ref.garch);
        CHECK(*a.lags == 12);
        CHECK(a.statistic == Approx(97.90982609014641).epsilon(1e-9));
        CHECK(a.p_value == Approx(1.427810623001869e-15).epsilon(1e-6));
        CHECK(arch_lm(ref.garch, 5).statistic == Approx(67.7471271541902).epsilon(1e-9));
        CHECK(arch_lm(ref.walk).statistic == Approx(548.7954697471174).epsilon(1e-9));
    }
    SECTION("shift and scale invariance") {
        auto y = ref.garch;
        for (auto& v : y) v = 3.7 * v - 2.0;
        CHECK(arch_lm(y).statistic == Approx(arch_lm(ref.garch).statistic).epsilon(1e-9));
        CHECK(jarque_bera(y).statistic == Approx(jarque_bera(ref.garch).statistic).epsilon(1e-9));
    }
    SECTION("errors") {
        CHECK_THROWS_AS(arch_lm(std::vector<double>(59, 1.0), 12), Error);
        CHECK_THROWS_AS(arch_lm(ref.garch, 0), Error);
        try {
            arch_lm(std::vector<double>(100, 1.0), 12);
            FAIL("expected singular regression");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SingularMatrix);
        }
    }
}

TEST_CASE("diagnostics Monte Carlo, reduced", "[diagnostics][mc]") {
    // Smaller than the acceptance run: 200 replicates at n = 2000. At this n
    // the LM test is slightly undersized (about 3.5% at nominal 5%).
    int arch_size = 0, arch_power = 0, adf_walk = 0, adf_noise = 0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        arch_size += arch_lm(normal_sample(2000, 1000 + rep)).reject_5pct;
        arch_power += arch_lm(garch11(2000, 0.05, 0.1, 0.85, 2000 + rep)).reject_1pct;
        adf_walk += adf_test(random_walk(2000, 3000 + rep)).reject_1pct;
        adf_noise += adf_test(normal_sample(2000, 4000 + rep)).reject_1pct;
    }
    CHECK(arch_size >= 1);
    CHECK(arch_size <= 20);
    CHECK(arch_power >= 180);
    CHECK(adf_walk <= 8);
    CHECK(adf_noise == 200);
}
