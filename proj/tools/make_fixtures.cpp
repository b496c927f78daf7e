// Writes the bundled fixture set: seven daily price files over
// 2021-10-18..2024-02-19 and a pipeline config. The benchmark is drawn from
// the two-component mixture; each target follows EGARCH-M driven by the
// benchmark's component labels. Usage: make_fixtures OUT_DIR
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "turmoil/egarch_m.hpp"
#include "turmoil/mgnd_em.hpp"

namespace {

using namespace turmoil;
using namespace std::chrono;

struct Target {
    const char* ticker;
    const char* type;
    const char* market;
    EgarchMParams params;
    std::vector<const char*> closed;  // market-specific non-trading days
};

EgarchMParams make(double mu, double m1, double lambda, double omega, double v1, double alpha1,
                   double gamma1, double beta1, double nu, double s) {
    return {mu, m1, 0.0, lambda, omega, v1, alpha1, gamma1, beta1, {nu, s}};
}

std::vector<Date> business_days(Date from, Date to) {
    std::vector<Date> out;
    for (Date d = from; d <= to; d += days{1}) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.push_back(d);
    }
    return out;
}

void write_prices(const std::filesystem::path& file, const std::vector<Date>& dates,
                  const std::vector<double>& returns, double start, const std::set<Date>& closed,
                  const std::set<Date>& missing) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << "Date,Close\n";
    double level = start;
    char buf[64];
    for (std::size_t t = 0; t < dates.size(); ++t) {
        if (t > 0) level *= std::exp(returns[t] / 100.0);
        if (closed.count(dates[t])) continue;
        if (missing.count(dates[t])) {
            out << format_date(dates[t]) << ",n/a\n";
            continue;
        }
        std::snprintf(buf, sizeof buf, "%.4f", level);
        out << format_date(dates[t]) << ',' << buf << '\n';
    }
}

std::set<Date> to_dates(const std::vector<const char*>& text) {
    std::set<Date> out;
    for (const char* s : text) out.insert(*parse_date(s));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures OUT_DIR\n";
        return 1;
    }
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);

    const auto dates = business_days(*parse_date("2021-10-18"), *parse_date("2024-02-19"));
    const std::vector<const char*> common{"2021-12-24", "2021-12-31", "2022-04-15", "2022-04-18",
                                          "2022-12-26", "2023-04-07", "2023-04-10", "2023-05-01",
                                          "2023-12-25", "2023-12-26", "2024-01-01"};

    const MgndParams mixture{{{0.8502, 0.1141, 0.7351, 1.3123}, {0.1498, -0.4408, 2.0158, 1.7998}}};
    const auto draws = mgnd_sample(mixture, dates.size(), 20211018);
    std::vector<double> dummy(dates.size());
    for (std::size_t t = 0; t < dates.size(); ++t) dummy[t] = draws.components[t] == 1 ? 1.0 : 0.0;

    std::set<Date> closed = to_dates(common);
    write_prices(dir / "STOXX50E.csv", dates, draws.values, 4150.0, closed, to_dates({"2022-08-03"}));

    const std::vector<Target> targets{
        {"DAX", "traditional", "Germany",
         make(-0.0887, -2.6587, 0.2083, -0.0320, 0.4841, -0.1123, 0.1121, 0.9389, 1.4890, 1.0295),
         {"2022-06-06", "2023-10-03"}},
        {"DAX30ESGK", "ESG", "Germany",
         make(-0.0404, -2.6888, 0.1428, -0.0215, 0.3940, -0.1051, 0.1147, 0.9536, 1.3553, 1.0330),
         {"2022-06-06", "2023-10-03"}},
        {"CAC40", "traditional", "France",
         make(-0.1690, -2.6935, 0.3117, -0.0435, 0.5934, -0.1420, 0.0546, 0.9105, 1.6868, 1.0558), {}},
        {"CAC40ESG", "ESG", "France",
         make(-0.0633, -2.2656, 0.1713, -0.0384, 0.6434, -0.1554, 0.0798, 0.9102, 1.7020, 1.0066), {}},
        {"FTSEMIB", "traditional", "Italy",
         make(-0.1476, -2.7659, 0.2795, -0.0255, 0.6166, -0.1129, 0.0863, 0.9026, 1.8300, 0.9999),
         {"2023-08-15"}},
        {"MIBESG", "ESG", "Italy",
         make(-0.1461, -2.7715, 0.2704, -0.0238, 0.7009, -0.1221, 0.1024, 0.8856, 1.8833, 0.9965),
         {"2023-08-15"}},
    };

    std::ofstream cfg(dir / "config.json", std::ios::binary | std::ios::trunc);
    cfg << "{\n"
        << "  \"benchmark\": {\"ticker\": \"STOXX50E\", \"path\": \"STOXX50E.csv\", \"type\": \"traditional\", "
           "\"market\": \"Europe\"},\n"
        << "  \"targets\": [\n";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& t = targets[i];
        auto c = closed;
        for (const auto& d : to_dates(t.closed)) c.insert(d);
        const auto missing = i == 3 ? to_dates({"2023-03-15"}) : std::set<Date>{};
        const auto path = simulate_egarch_m(t.params, dummy, dates.size(), 1000 + i);
        write_prices(dir / (std::string(t.ticker) + ".csv"), dates, path.returns, 10000.0 + 1000.0 * static_cast<double>(i),
                     c, missing);
        cfg << "    {\"ticker\": \"" << t.ticker << "\", \"path\": \"" << t.ticker << ".csv\", \"type\": \""
            << t.type << "\", \"market\": \"" << t.market << "\"}" << (i + 1 < targets.size() ? "," : "") << '\n';
    }
    cfg << "  ],\n"
        << "  \"columns\": {\"date\": \"Date\", \"value\": \"Close\", \"date_format\": \"%Y-%m-%d\"},\n"
        << "  \"window\": {\"start\": \"2021-10-18\", \"end\": \"2024-02-19\"},\n"
        << "  \"k\": 2,\n"
        << "  \"seed\": 20240219,\n"
        << "  \"tests\": {\"adf_max_lag\": null, \"archlm_lags\": 12},\n"
        << "  \"mgnd\": {\"init\": \"core-tail\", \"tol\": 1e-6, \"max_iter\": 500, \"restarts\": 5, "
           "\"density_points\": 2001},\n"
        << "  \"egarch\": {\"grad_tol\": 1e-5, \"max_iter\": 1000},\n"
        << "  \"out\": \"out\"\n"
        << "}\n";
    return 0;
}
