#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "job.hpp"

using acw::job::ConfigError;
using acw::job::JobConfig;

namespace {

struct CliOptions {
    std::string config;
    std::string fixture;
    std::vector<std::string> params;
    std::optional<long> n;
    std::optional<std::uint64_t> seed;
    std::string format;
    std::string output;
    std::optional<int> patch_dim;
    std::optional<int> samples;
    bool all = false;
    bool no_timings = false;
};

void add_common(CLI::App* sub, CliOptions& o) {
    sub->add_option("--config", o.config, "JSON or TOML job file")->check(CLI::ExistingFile);
    sub->add_option("--fixture", o.fixture, "built-in example (see list-fixtures)");
    sub->add_option("--param", o.params, "fixture parameter key=value")->take_all();
    sub->add_option("--n", o.n, "shorthand for --param n=<value>");
    sub->add_option("--seed", o.seed, "sampling seed (overrides ACW_SEED and the config)");
    sub->add_option("--format", o.format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    sub->add_option("--output", o.output, "write the report to a file");
    sub->add_option("--patch-dim", o.patch_dim, "dimension of the local patch for field checks");
    sub->add_option("--samples", o.samples, "sample count for the cocycle checks");
    sub->add_flag("--all", o.all, "run every applicable check");
    sub->add_flag("--no-timings", o.no_timings, "omit timings from the report");
}

JobConfig build_config(const std::string& command, const CliOptions& o) {
    JobConfig cfg = o.config.empty() ? JobConfig{} : acw::job::load_config(o.config);
    cfg.command = command;
    if (!o.fixture.empty()) {
        cfg.fixture = o.fixture;
        cfg.algebroid = nullptr;
        cfg.adjustment = nullptr;
        cfg.cover = nullptr;
    }
    for (const auto& kv : o.params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
        cfg.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (o.n) cfg.params["n"] = std::to_string(*o.n);
    if (o.seed) {
        cfg.seed = *o.seed;
    } else if (const char* env = std::getenv("ACW_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("ACW_SEED is not an unsigned integer: ") + env);
        }
    }
    if (!o.format.empty()) cfg.format = o.format;
    if (!o.output.empty()) cfg.output = o.output;
    if (o.patch_dim) cfg.patch_dim = *o.patch_dim;
    if (o.samples) cfg.cocycle_samples = *o.samples;
    if (o.no_timings) cfg.timings = false;
    if (o.all) cfg.checks.clear();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic checks for Lie algebroids, adjusted connections and bundle cocycles"};
    app.set_version_flag("--version", acw::job::kVersion);
    app.require_subcommand(1);

    CliOptions opts;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "check the bracket, anchor and nilpotency of the differentials"},
        {"adjust", "classify the adjustment tier"},
        {"gauge", "Bianchi identities and gauge covariance on a patch"},
        {"closure", "commutator of two gauge transformations"},
        {"cocycle", "cocycle and gluing conditions on a cover"},
        {"chern", "Chern number of a U(1) bundle"},
        {"spot-check", "numeric cross-check of symbolic residuals"},
        {"check", "every applicable check"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, opts);
        subs.push_back(sub);
    }
    auto* list = app.add_subcommand("list-fixtures", "print the built-in examples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& name : acw::fixture_names()) {
            auto fx = acw::instantiate(name);
            std::cout << name << "\t" << fx.description << "\n";
        }
        return 0;
    }

    try {
        std::string command;
        for (auto* s : subs)
            if (s->parsed()) command = s->get_name();
        JobConfig cfg = build_config(command, opts);
        auto outcome = acw::job::run(cfg);
        std::string text =
            cfg.format == "markdown" ? acw::job::render_markdown(outcome.report) : outcome.report.dump(2) + "\n";
        if (cfg.output) {
            std::ofstream out(*cfg.output);
            if (!out) throw ConfigError("cannot write " + *cfg.output);
            out << text;
        } else {
            std::cout << text;
        }
        return outcome.exit_status;
    } catch (const ConfigError& e) {
        std::cerr << "acw: configuration error: " << e.what() << "\n";
        return 2;
    } catch (const acw::Error& e) {
        std::cerr << "acw: " << e.what() << "\n";
        return 2;
    }
}
