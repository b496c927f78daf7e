#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "turmoil/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::optional<std::size_t> adf_max_lag;
    std::optional<std::size_t> archlm_lags;
    std::optional<std::string> window;
};

turmoil::PipelineConfig make_config(const Overrides& o) {
    auto c = turmoil::load_config(o.config);
    if (o.out) c.out_dir = *o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.k) c.k = *o.k;
    if (o.adf_max_lag) c.adf_max_lag = *o.adf_max_lag;
    if (o.archlm_lags) c.archlm_lags = *o.archlm_lags;
    if (o.window) {
        const auto [start, end] = turmoil::parse_window(*o.window);
        c.start = start;
        c.end = end;
    }
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turmoil detection and EGARCH-in-mean pipeline"};
    app.require_subcommand(1);
    Overrides o;
    const auto add_flags = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "pipeline config (JSON)")->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "base seed");
        sub->add_option("--k", o.k, "mixture components");
        sub->add_option("--adf-max-lag", o.adf_max_lag, "ADF maximum lag (default: Schwert rule)");
        sub->add_option("--archlm-lags", o.archlm_lags, "ARCH-LM lags");
        sub->add_option("--window", o.window, "date window START:END (ISO dates)");
    };
    using Command = turmoil::StageResult (*)(const turmoil::PipelineConfig&);
    Command command = nullptr;
    const std::pair<const char*, Command> verbs[] = {
        {"ingest", turmoil::cmd_ingest}, {"detect", turmoil::cmd_detect}, {"tests", turmoil::cmd_tests},
        {"fit", turmoil::cmd_fit},       {"run-all", turmoil::run_all},
    };
    for (const auto& [name, fn] : verbs) {
        auto* sub = app.add_subcommand(name);
        add_flags(sub);
        sub->callback([&command, fn = fn] { command = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const auto result = command(make_config(o));
        for (const auto& f : result.failures) std::cerr << "partial failure: " << f << '\n';
        return result.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return 1;
    }
}
