// denjoy-lab: run one experiment, the acceptance suite, or list what is available.

#include <iostream>

#include "CLI11.hpp"
#include "denjoy/experiments.hpp"

using namespace denjoy;

namespace {

int run_command(const std::string& name, const std::string& config, const std::vector<std::string>& sets,
                std::optional<std::uint64_t> seed_flag, const std::string& out, bool plots) {
    std::vector<std::pair<std::string, std::string>> settings;
    std::uint64_t seed = 1;
    std::string exp = name;
    try {
        // a manifest is a valid config: its experiment and seed lines are honoured
        if (!config.empty())
            for (auto& [k, v] : parse_config(read_file(config))) {
                if (k == "seed")
                    seed = std::uint64_t(parse_long(v, "seed"));
                else if (k == "experiment") {
                    if (exp.empty()) exp = v;
                    else if (exp != v) throw config_error("config names experiment '" + v + "', command line '" + exp + "'");
                } else
                    settings.emplace_back(k, v);
            }
        for (const auto& s : sets) settings.push_back(parse_assignment(s, "--set"));
        if (exp.empty()) throw config_error("no experiment given");
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    }
    if (seed_flag) seed = *seed_flag;
    const std::filesystem::path dir = out.empty() ? std::filesystem::path("out") / exp : std::filesystem::path(out);
    const auto r = run_experiment(exp, settings, seed, dir, plots);
    for (const auto& c : r.outcome.checks)
        std::cout << (c.ok ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " [" + c.detail + "]") << "\n";
    if (r.status != exit_ok) std::cerr << r.message << "\n";
    if (r.status != exit_config) std::cout << "artifacts in " << dir.string() << "\n";
    return r.status;
}

int suite_command(const std::string& tag, const std::string& fault, const std::string& out) {
    std::vector<int> ids;
    Faults faults;
    try {
        faults = Faults::parse(fault);
        ids = criterion_ids(tag == "all" ? "" : tag);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    }
    Csv csv({"id", "name", "tags", "pass", "seconds", "budget", "values", "failure"});
    int failed = 0;
    for (int id : ids) {
        const auto r = run_criterion(id, faults);
        std::cout << format_result(r) << std::endl;
        failed += !r.pass();
        std::string tags, values;
        for (const auto& t : r.tags) tags += (tags.empty() ? "" : ";") + t;
        for (const auto& [k, v] : r.values) values += (values.empty() ? "" : ";") + k + "=" + fmt(v);
        std::string failure = r.failure;  // the CSV has no quoting
        std::replace(failure.begin(), failure.end(), ',', ';');
        csv.raw({std::to_string(r.id), r.name, tags, r.pass() ? "1" : "0", fmt(r.seconds), fmt(r.budget), values,
                 failure});
    }
    std::cout << (failed ? "FAIL" : "PASS") << " suite: " << ids.size() - std::size_t(failed) << "/" << ids.size()
              << " criteria\n";
    if (!out.empty()) write_file(std::filesystem::path(out) / "suite.csv", csv.str());
    return failed ? exit_assertion : exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experiments on commuting circle and interval diffeomorphisms and random compositions"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one experiment");
    std::string name, config, out;
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    bool plots = false;
    run->add_option("experiment", name, "experiment name (see `list`)");
    run->add_option("--config", config, "file of key=value lines")->check(CLI::ExistingFile);
    run->add_option("--set", sets, "override one key, KEY=VALUE (repeatable)");
    auto* seed_opt = run->add_option("--seed", seed, "64-bit seed (default 1)");
    run->add_option("--out", out, "output directory (default out/<experiment>)");
    run->add_flag("--plots", plots, "also write SVG plots");

    auto* suite = app.add_subcommand("suite", "run the acceptance criteria");
    std::string tag = "all", fault, suite_out;
    suite->add_option("--tag", tag, "only criteria with this tag (all, walks, maps, constructions, distortion, sacksteder, ergodic)");
    suite->add_option("--inject", fault, "deliberate fault: corrupt-spring | asymmetric-escape | nonstationary-lyapunov");
    suite->add_option("--out", suite_out, "directory for suite.csv");

    auto* list = app.add_subcommand("list", "list experiments and their keys");
    std::string which;
    list->add_option("experiment", which, "show the keys of one experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    if (*run)
        return run_command(name, config, sets, seed_opt->count() ? std::optional(seed) : std::nullopt, out, plots);
    if (*suite) return suite_command(tag, fault, suite_out);
    for (const auto& e : experiments()) {
        if (!which.empty() && e.name != which) continue;
        std::cout << e.name << "  " << e.about << "\n";
        if (which.empty()) continue;
        for (const auto& k : e.keys) std::cout << "  " << k.name << "=" << k.value << "  " << k.help << "\n";
    }
    return 0;
}
