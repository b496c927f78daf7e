#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "turmoil/csv.hpp"
#include "turmoil/diagnostics.hpp"
#include "turmoil/egarch_m.hpp"
#include "turmoil/error.hpp"
#include "turmoil/mgnd_em.hpp"
#include "turmoil/returns.hpp"

namespace turmoil {

namespace fs = std::filesystem;

struct IndexSpec {
    std::string ticker;
    std::string path;
    std::string type;    // "traditional" or "ESG"
    std::string market;
    std::optional<std::string> date_column;
    std::optional<std::string> value_column;
};

/// Run configuration. Loaded from JSON; see README for the schema.
struct PipelineConfig {
    IndexSpec benchmark;
    std::vector<IndexSpec> targets;
    std::string date_column = "Date";
    std::string value_column = "Close";
    std::string date_format = std::string(kIsoDateFormat);
    std::optional<Date> start;
    std::optional<Date> end;
    std::size_t k = 2;
    std::uint64_t seed = 20211018;
    std::optional<std::size_t> adf_max_lag;
    std::size_t archlm_lags = 12;
    InitStrategy mgnd_init = InitStrategy::CoreTail;
    double mgnd_tol = 1e-6;
    std::size_t mgnd_max_iter = 500;
    std::size_t mgnd_restarts = 5;
    double egarch_grad_tol = 1e-5;
    std::size_t egarch_max_iter = 1000;
    std::size_t density_points = 2001;
    std::string out_dir = "out";

    void validate() const {
        if (benchmark.ticker.empty() || benchmark.path.empty())
            throw Error(ErrorCode::InvalidArgument, "config: benchmark ticker and path are required");
        std::vector<std::string> seen{benchmark.ticker};
        for (const auto& t : targets) {
            if (t.ticker.empty() || t.path.empty())
                throw Error(ErrorCode::InvalidArgument, "config: every target needs ticker and path");
            if (std::find(seen.begin(), seen.end(), t.ticker) != seen.end())
                throw Error(ErrorCode::InvalidArgument, "config: duplicate ticker " + t.ticker);
            seen.push_back(t.ticker);
        }
        for (const auto& name : seen)
            for (char c : name)
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
                    throw Error(ErrorCode::InvalidArgument, "config: ticker '" + name +
                                                                "' must be [A-Za-z0-9_.-]");
        if (start && end && !(*start < *end))
            throw Error(ErrorCode::InvalidArgument, "config: window start must precede end");
        if (k < 2) throw Error(ErrorCode::InvalidArgument, "config: regime detection needs k >= 2");
        if (archlm_lags < 1) throw Error(ErrorCode::InvalidArgument, "config: archlm_lags must be >= 1");
        if (density_points < 3) throw Error(ErrorCode::InvalidArgument, "config: density_points must be >= 3");
    }

    [[nodiscard]] CsvLoadOptions load_options(const IndexSpec& s) const {
        return {s.date_column.value_or(date_column), s.value_column.value_or(value_column), date_format};
    }
};

namespace detail {

inline Date require_date(const std::string& text, const std::string& what) {
    const auto d = parse_date(text);
    if (!d) throw Error(ErrorCode::InvalidArgument, what + ": bad date '" + text + "'");
    return *d;
}

inline std::string resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

inline IndexSpec index_from_json(const nlohmann::json& j, const fs::path& base) {
    IndexSpec s;
    s.ticker = j.at("ticker").get<std::string>();
    s.path = resolve(base, j.at("path").get<std::string>());
    s.type = j.value("type", "");
    s.market = j.value("market", "");
    if (j.contains("date_column")) s.date_column = j["date_column"].get<std::string>();
    if (j.contains("value_column")) s.value_column = j["value_column"].get<std::string>();
    return s;
}

}  // namespace detail

/// Parses a window of the form START:END (ISO dates, either side may be empty).
inline std::pair<std::optional<Date>, std::optional<Date>> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "window must be START:END, got '" + text + "'");
    std::pair<std::optional<Date>, std::optional<Date>> w;
    const auto a = text.substr(0, colon), b = text.substr(colon + 1);
    if (!a.empty()) w.first = detail::require_date(a, "window start");
    if (!b.empty()) w.second = detail::require_date(b, "window end");
    return w;
}

/// Relative paths inside the file resolve against the file's directory.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
    }
    const fs::path base = fs::absolute(fs::path(path)).parent_path();
    PipelineConfig c;
    try {
        c.benchmark = detail::index_from_json(j.at("benchmark"), base);
        for (const auto& t : j.value("targets", nlohmann::json::array()))
            c.targets.push_back(detail::index_from_json(t, base));
        if (j.contains("columns")) {
            const auto& col = j["columns"];
            c.date_column = col.value("date", c.date_column);
            c.value_column = col.value("value", c.value_column);
            c.date_format = col.value("date_format", c.date_format);
        }
        if (j.contains("window")) {
            const auto& w = j["window"];
            if (w.contains("start")) c.start = detail::require_date(w["start"].get<std::string>(), "window start");
            if (w.contains("end")) c.end = detail::require_date(w["end"].get<std::string>(), "window end");
        }
        c.k = j.value("k", c.k);
        c.seed = j.value("seed", c.seed);
        if (j.contains("tests")) {
            const auto& t = j["tests"];
            if (t.contains("adf_max_lag") && !t["adf_max_lag"].is_null())
                c.adf_max_lag = t["adf_max_lag"].get<std::size_t>();
            c.archlm_lags = t.value("archlm_lags", c.archlm_lags);
        }
        if (j.contains("mgnd")) {
            const auto& m = j["mgnd"];
            const auto init = m.value("init", std::string("core-tail"));
            if (init == "core-tail")
                c.mgnd_init = InitStrategy::CoreTail;
            else if (init == "random")
                c.mgnd_init = InitStrategy::RandomRestarts;
            else
                throw Error(ErrorCode::InvalidArgument, "mgnd.init must be core-tail or random");
            c.mgnd_tol = m.value("tol", c.mgnd_tol);
            c.mgnd_max_iter = m.value("max_iter", c.mgnd_max_iter);
            c.mgnd_restarts = m.value("restarts", c.mgnd_restarts);
            c.density_points = m.value("density_points", c.density_points);
        }
        if (j.contains("egarch")) {
            const auto& e = j["egarch"];
            c.egarch_grad_tol = e.value("grad_tol", c.egarch_grad_tol);
            c.egarch_max_iter = e.value("max_iter", c.egarch_max_iter);
        }
        if (j.contains("out")) c.out_dir = detail::resolve(base, j["out"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
    }
    return c;
}

enum class Stage : std::uint64_t { Detect = 1, Fit = 2 };

/// Stage seeds: splitmix64 of (seed + 0x9E3779B97F4A7C15 * stage) xor index.
/// Detect uses index 0; fit uses the target's position in the config.
inline std::uint64_t derive_seed(std::uint64_t seed, Stage stage, std::uint64_t index = 0) {
    std::uint64_t z = (seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(stage)) ^ index;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-index problems that did not stop the stage.
struct StageResult {
    std::vector<std::string> failures;

    void merge(const StageResult& other) {
        failures.insert(failures.end(), other.failures.begin(), other.failures.end());
    }
    [[nodiscard]] int exit_code() const { return failures.empty() ? 0 : 2; }
};

namespace detail {

inline std::string out_path(const PipelineConfig& c, const std::string& name) {
    return (fs::path(c.out_dir) / name).string();
}

inline std::string returns_file(const PipelineConfig& c, const std::string& ticker) {
    return out_path(c, "returns_" + ticker + ".csv");
}

inline std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline ReturnSeries read_returns(const PipelineConfig& c, const std::string& ticker) {
    const auto path = returns_file(c, ticker);
    if (!fs::exists(path))
        throw Error(ErrorCode::FileNotFound, path + " (run ingest first)");
    return load_series<ReturnKind>(path, ticker, {"date", "return", std::string(kIsoDateFormat)}).series;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace detail

/// Loads every price file, windows it, writes returns_<TICKER>.csv and
/// summary_stats.csv. Any load failure is fatal after all files are tried.
inline StageResult cmd_ingest(const PipelineConfig& c) {
    c.validate();
    fs::create_directories(c.out_dir);
    std::vector<IndexSpec> all{c.benchmark};
    all.insert(all.end(), c.targets.begin(), c.targets.end());

    std::vector<ReturnSeries> returns;
    std::vector<std::string> errors;
    std::optional<ErrorCode> first_code;
    for (const auto& spec : all) {
        try {
            const auto prices = load_series<PriceKind>(spec.path, spec.ticker, c.load_options(spec))
                                    .series.windowed(c.start, c.end);
            if (prices.size() < 2)
                throw Error(ErrorCode::TooFewObservations, spec.ticker + ": fewer than 2 prices in window");
            returns.push_back(log_returns(prices));
        } catch (const Error& e) {
            log_event("ingest_error", {{"ticker", spec.ticker}, {"path", spec.path}, {"error", e.what()}});
            errors.push_back(spec.ticker + ": " + e.what());
            if (!first_code) first_code = e.code();
        }
    }
    if (!errors.empty()) {
        std::string msg = "ingest failed for " + std::to_string(errors.size()) + " file(s)";
        for (const auto& e : errors) msg += "\n  " + e;
        throw Error(*first_code, msg);
    }

    CsvWriter summary(detail::out_path(c, "summary_stats.csv"));
    summary.row({"ticker", "type", "market", "n", "mean", "stdev", "skewness", "excess_kurtosis",
                 "kurtosis", "moments_defined"});
    StageResult result;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto& r = returns[i];
        write_series_csv(detail::returns_file(c, r.ticker()), r, "return");
        std::vector<std::string> row{all[i].ticker, all[i].type, all[i].market, std::to_string(r.size())};
        try {
            const auto s = summary_stats(r);
            row.insert(row.end(), {format_double(s.mean), format_double(s.stdev), detail::opt_num(s.skewness),
                                   detail::opt_num(s.excess_kurtosis), detail::opt_num(s.raw_kurtosis),
                                   s.skewness ? "true" : "false"});
        } catch (const Error& e) {
            row.insert(row.end(), {"", "", "", "", "", "false"});
            log_event("summary_skipped", {{"ticker", r.ticker()}, {"error", e.what()}});
        }
        summary.row(row);
        log_event("ingested", {{"ticker", r.ticker()}, {"returns", std::to_string(r.size())}});
    }
    return result;
}

/// Fits the mixture on the benchmark returns and writes the fit report,
/// posteriors, the TURMOIL dummy and a density grid. Fit failure is fatal.
inline StageResult cmd_detect(const PipelineConfig& c) {
    c.validate();
    fs::create_directories(c.out_dir);
    const auto r = detail::read_returns(c, c.benchmark.ticker);

    MgndFitOptions opts;
    opts.k = c.k;
    opts.init = c.mgnd_init;
    opts.tol = c.mgnd_tol;
    opts.max_iter = c.mgnd_max_iter;
    opts.restarts = c.mgnd_restarts;
    opts.seed = derive_seed(c.seed, Stage::Detect);
    const auto fit = fit_mgnd(r, opts);
    const auto& p = fit.params;
    const auto post = responsibilities(r.span(), p);

    StageResult result;
    std::optional<RegimeClassification> rc;
    if (p.k() == 2) {
        rc = classify(r.span(), p);
        write_series_csv(detail::out_path(c, "turmoil_dummy.csv"), dummy_series(r, *rc), "turmoil");
    } else {
        result.failures.push_back("turmoil dummy not written: identification is defined for k = 2 only");
        log_event("detect_warning", {{"reason", "k != 2, no turmoil dummy"}});
    }

    nlohmann::json j;
    j["ticker"] = r.ticker();
    j["n"] = r.size();
    j["k"] = p.k();
    j["seed"] = opts.seed;
    j["loglik"] = fit.loglik;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["restarts_used"] = fit.restarts_used;
    j["loglik_path"] = fit.loglik_path;
    j["components"] = nlohmann::json::array();
    for (std::size_t k = 0; k < p.k(); ++k) {
        const auto& comp = p.components[k];
        j["components"].push_back({{"component", k + 1},
                                   {"pi", comp.pi},
                                   {"mu", comp.mu},
                                   {"delta", comp.delta},
                                   {"nu", comp.nu},
                                   {"sd", comp.sd()},
                                   {"nu_at_boundary", static_cast<bool>(fit.nu_at_boundary[k])}});
    }
    if (rc) {
        j["turmoil_component"] = rc->turmoil_index + 1;
        j["turmoil_days"] = std::accumulate(rc->dummy.begin(), rc->dummy.end(), 0);
        j["turmoil_share"] = rc->turmoil_share();
    }
    detail::write_json(detail::out_path(c, "mgnd_fit.json"), j);

    {
        CsvWriter w(detail::out_path(c, "regime_posteriors.csv"));
        std::vector<std::string> head{"date", "return"};
        for (std::size_t k = 0; k < p.k(); ++k) head.push_back("posterior_" + std::to_string(k + 1));
        head.push_back("component");
        if (rc) head.push_back("turmoil");
        w.row(head);
        for (std::size_t t = 0; t < r.size(); ++t) {
            std::vector<std::string> row{format_date(r.dates()[t]), format_double(r.values()[t])};
            std::size_t best = 0;
            for (std::size_t k = 0; k < p.k(); ++k) {
                const double v = post(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
                row.push_back(format_double(v));
                if (v > post(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(best))) best = k;
            }
            row.push_back(std::to_string((rc ? rc->labels[t] : best) + 1));
            if (rc) row.push_back(std::to_string(rc->dummy[t]));
            w.row(row);
        }
    }

    {
        // Padded by four of the widest component sd beyond the sample range.
        double widest = 0.0;
        for (const auto& comp : p.components) widest = std::max(widest, comp.sd());
        const auto [lo_it, hi_it] = std::minmax_element(r.values().begin(), r.values().end());
        const double lo = *lo_it - 4.0 * widest, hi = *hi_it + 4.0 * widest;
        const std::size_t m = c.density_points;
        CsvWriter w(detail::out_path(c, "mgnd_density.csv"));
        std::vector<std::string> head{"x", "density"};
        for (std::size_t k = 0; k < p.k(); ++k) head.push_back("component_" + std::to_string(k + 1));
        w.row(head);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
            std::vector<std::string> row{format_double(x), ""};
            double total = 0.0;
            for (const auto& comp : p.components) {
                const double v = comp.pi * gnd_pdf(x, comp.gnd());
                total += v;
                row.push_back(format_double(v));
            }
            row[1] = format_double(total);
            w.row(row);
        }
    }
    log_event("detected", {{"ticker", r.ticker()},
                           {"iterations", std::to_string(fit.iterations)},
                           {"converged", fit.converged ? "true" : "false"},
                           {"turmoil_share", rc ? format_double(rc->turmoil_share()) : ""}});
    return result;
}

/// JB, ADF and ARCH-LM per target into diagnostics.csv.
inline StageResult cmd_tests(const PipelineConfig& c) {
    c.validate();
    fs::create_directories(c.out_dir);
    StageResult result;
    CsvWriter w(detail::out_path(c, "diagnostics.csv"));
    w.row({"ticker", "type", "market", "n", "jb", "jb_p", "jb_sig", "adf", "adf_p", "adf_lags", "adf_sig",
           "archlm", "archlm_p", "archlm_lags", "archlm_sig", "status"});
    for (const auto& spec : c.targets) {
        std::vector<std::string> row{spec.ticker, spec.type, spec.market};
        try {
            const auto r = detail::read_returns(c, spec.ticker);
            const auto jb = jarque_bera(r.span());
            const auto adf = adf_test(r.span(), c.adf_max_lag);
            const auto lm = arch_lm(r.span(), c.archlm_lags);
            row.insert(row.end(),
                       {std::to_string(r.size()), format_double(jb.statistic), format_double(jb.p_value),
                        significance_stars(jb.p_value), format_double(adf.statistic),
                        format_double(adf.p_value), std::to_string(*adf.lags),
                        significance_stars(adf.p_value), format_double(lm.statistic),
                        format_double(lm.p_value), std::to_string(*lm.lags), significance_stars(lm.p_value),
                        "ok"});
        } catch (const Error& e) {
            row.resize(15);
            row.push_back(std::string("failed: ") + e.what());
            result.failures.push_back(spec.ticker + ": " + e.what());
            log_event("tests_failed", {{"ticker", spec.ticker}, {"error", e.what()}});
        }
        w.row(row);
    }
    return result;
}

/// Fits EGARCH-M per target against the TURMOIL dummy. Writes
/// egarch_<TICKER>.json and volatility_<TICKER>.csv per index plus
/// egarch_mean.csv, egarch_volatility.csv and turmoil_impact.csv.
inline StageResult cmd_fit(const PipelineConfig& c) {
    c.validate();
    fs::create_directories(c.out_dir);
    const auto dummy_path = detail::out_path(c, "turmoil_dummy.csv");
    if (!fs::exists(dummy_path)) throw Error(ErrorCode::FileNotFound, dummy_path + " (run detect first)");
    const auto dummy =
        load_series<IndicatorKind>(dummy_path, "TURMOIL", {"date", "turmoil", std::string(kIsoDateFormat)})
            .series;

    StageResult result;
    CsvWriter mean_csv(detail::out_path(c, "egarch_mean.csv"));
    CsvWriter vol_csv(detail::out_path(c, "egarch_volatility.csv"));
    CsvWriter impact_csv(detail::out_path(c, "turmoil_impact.csv"));
    const auto coef_header = [](const std::vector<std::size_t>& idx) {
        std::vector<std::string> h{"ticker", "type", "market", "status", "n"};
        for (auto i : idx) {
            const std::string name = kEgarchParamNames[i];
            h.insert(h.end(), {name, name + "_se", name + "_p", name + "_sig"});
        }
        return h;
    };
    const std::vector<std::size_t> mean_idx{0, 1, 2, 3};
    const std::vector<std::size_t> vol_idx{4, 5, 6, 7, 8, 9, 10};
    mean_csv.row(coef_header(mean_idx));
    vol_csv.row(coef_header(vol_idx));
    impact_csv.row({"ticker", "type", "market", "status", "m1", "m1_p", "m1_sig", "v1", "v1_p", "v1_sig",
                    "peak_volatility"});

    for (std::size_t i = 0; i < c.targets.size(); ++i) {
        const auto& spec = c.targets[i];
        const std::vector<std::string> id{spec.ticker, spec.type, spec.market};
        try {
            const auto raw = detail::read_returns(c, spec.ticker);
            const auto [r, d] = align(raw, dummy);
            if (r.size() != raw.size())
                log_event("align_dropped", {{"ticker", spec.ticker},
                                            {"source", "returns"},
                                            {"count", std::to_string(raw.size() - r.size())}});
            for (const auto& date : raw.dates())
                if (!std::binary_search(r.dates().begin(), r.dates().end(), date))
                    log_event("align_dropped_date", {{"ticker", spec.ticker}, {"date", format_date(date)}});

            EgarchFitOptions opts;
            opts.grad_tol = c.egarch_grad_tol;
            opts.max_iter = c.egarch_max_iter;
            opts.seed = derive_seed(c.seed, Stage::Fit, i);
            const auto rep = fit_egarch_m(r, d, opts);
            const auto filtered = filter(rep.params, r, d);
            const std::string status = rep.converged ? "converged" : "not_converged";
            if (!rep.converged) result.failures.push_back(spec.ticker + ": not converged");

            const auto theta = rep.params.to_array();
            nlohmann::json j;
            j["ticker"] = spec.ticker;
            j["type"] = spec.type;
            j["market"] = spec.market;
            j["status"] = status;
            j["n_obs"] = rep.n_obs;
            j["seed"] = opts.seed;
            j["loglik"] = rep.loglik;
            j["converged"] = rep.converged;
            j["iterations"] = rep.iterations;
            j["evaluations"] = rep.evaluations;
            j["gradient_norm"] = rep.gradient_norm;
            j["peak_volatility"] = rep.peak_volatility;
            j["log_h2_0"] = filtered.log_h2_0;
            j["warnings"] = rep.warnings;
            for (std::size_t q = 0; q < kEgarchParamCount; ++q)
                j["parameters"][kEgarchParamNames[q]] = {
                    {"estimate", theta[q]},
                    {"std_error", detail::opt_json(rep.std_errors[q])},
                    {"p_value", detail::opt_json(rep.p_values[q])},
                    {"stars", rep.p_values[q] ? significance_stars(*rep.p_values[q]) : ""}};
            detail::write_json(detail::out_path(c, "egarch_" + spec.ticker + ".json"), j);

            {
                CsvWriter w(detail::out_path(c, "volatility_" + spec.ticker + ".csv"));
                w.row({"date", "h"});
                for (std::size_t t = 1; t < r.size(); ++t)
                    w.row({format_date(r.dates()[t]), format_double(filtered.h[t])});
            }

            const auto coef_row = [&](const std::vector<std::size_t>& idx) {
                std::vector<std::string> row = id;
                row.insert(row.end(), {status, std::to_string(rep.n_obs)});
                for (auto q : idx)
                    row.insert(row.end(), {format_double(theta[q]), detail::opt_num(rep.std_errors[q]),
                                           detail::opt_num(rep.p_values[q]),
                                           rep.p_values[q] ? significance_stars(*rep.p_values[q]) : ""});
                return row;
            };
            mean_csv.row(coef_row(mean_idx));
            vol_csv.row(coef_row(vol_idx));

            const NamedFit named{spec.ticker, rep};
            const auto impact = turmoil_impact_summary(std::span<const NamedFit>(&named, 1)).front();
            std::vector<std::string> row = id;
            row.insert(row.end(), {status, format_double(impact.m1), detail::opt_num(impact.m1_p_value),
                                   impact.m1_stars, format_double(impact.v1),
                                   detail::opt_num(impact.v1_p_value), impact.v1_stars,
                                   format_double(impact.peak_volatility)});
            impact_csv.row(row);
            log_event("fitted", {{"ticker", spec.ticker},
                                 {"status", status},
                                 {"iterations", std::to_string(rep.iterations)},
                                 {"loglik", format_double(rep.loglik)}});
        } catch (const Error& e) {
            const std::string status = std::string("failed: ") + e.what();
            result.failures.push_back(spec.ticker + ": " + e.what());
            log_event("fit_failed", {{"ticker", spec.ticker}, {"error", e.what()}});
            auto mean_row = id, vol_row = id, impact_row = id;
            mean_row.push_back(status);
            vol_row.push_back(status);
            impact_row.push_back(status);
            mean_row.resize(5 + 4 * mean_idx.size());
            vol_row.resize(5 + 4 * vol_idx.size());
            impact_row.resize(11);
            mean_csv.row(mean_row);
            vol_csv.row(vol_row);
            impact_csv.row(impact_row);
        }
    }
    return result;
}

inline StageResult run_all(const PipelineConfig& c) {
    StageResult result = cmd_ingest(c);
    result.merge(cmd_detect(c));
    result.merge(cmd_tests(c));
    result.merge(cmd_fit(c));
    return result;
}

}  // namespace turmoil
