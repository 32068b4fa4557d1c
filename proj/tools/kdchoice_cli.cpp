// Command-line front end for the (k,d)-choice toolkit. Every subcommand
// prints one machine-readable report (JSON by default, CSV with
// --format csv) and exits 0 on success, 1 when a verdict fails, 2 on usage
// or parameter errors.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kdchoice/kdchoice.hpp"
#include "kdchoice/report.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
    std::uint64_t seed = 1;
    std::string format = "json";
};

std::string format_double(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

int run_simulate(const kdchoice::ExperimentConfig& config, const CommonFlags& common,
                 const std::string& strategy_name) {
    const kdchoice::ExperimentReport report = kdchoice::run_trials(config);

    if (common.format == "csv") {
        std::vector<std::pair<std::string, std::string>> rows = {
            {"n", std::to_string(config.params.n)},
            {"m", std::to_string(config.params.m)},
            {"k", std::to_string(config.params.k)},
            {"d", std::to_string(config.params.d)},
            {"strategy", strategy_name},
            {"trials", std::to_string(config.trials)},
            {"max_load_mean", format_double(report.stats.mean_max_load())},
            {"max_load_max", std::to_string(report.stats.observed_max_load())},
            {"messages_per_ball",
             format_double(static_cast<double>(report.stats.messages_total) /
                           (static_cast<double>(config.params.m) *
                            static_cast<double>(config.trials)))},
        };
        for (const kdchoice::Verdict& v : report.verdicts) {
            rows.emplace_back("verdict." + v.name, kdchoice::to_string(v.status));
        }
        std::cout << kdchoice::render_kv_csv(rows);
    } else {
        json config_echo = kdchoice::to_json(report.config.params);
        config_echo["strategy"] = strategy_name;
        config_echo["trials"] = config.trials;
        config_echo["slack"] = config.slack;
        std::cout << kdchoice::render_document("simulate", config_echo, kdchoice::to_json(report),
                                               common.seed);
    }
    return report.all_passed() ? 0 : 1;
}

int run_pvector(std::uint32_t n, std::uint32_t k, std::uint32_t d, bool with_oracle,
                const CommonFlags& common) {
    const kdchoice::ProbabilityVector vec = kdchoice::probability_vector(n, k, d);
    json rows = json::array();
    double max_abs_diff = 0.0;
    for (std::uint32_t x = 1; x <= n; ++x) {
        json row = {{"x", x}, {"p", vec.at_rank(x)}};
        if (with_oracle) {
            const kdchoice::ExactProbability oracle = kdchoice::p_x_oracle(n, k, d, x);
            row["oracle"] = oracle.value();
            row["oracle_hits"] = oracle.hits;
            row["oracle_total"] = oracle.total;
            max_abs_diff = std::max(max_abs_diff, std::abs(vec.at_rank(x) - oracle.value()));
        }
        rows.push_back(row);
    }

    if (common.format == "csv") {
        std::ostringstream out;
        out << (with_oracle ? "x,p,oracle\n" : "x,p\n");
        for (const json& row : rows) {
            out << row["x"].get<std::uint32_t>() << ',' << format_double(row["p"].get<double>());
            if (with_oracle) out << ',' << format_double(row["oracle"].get<double>());
            out << '\n';
        }
        std::cout << out.str();
    } else {
        json results = {{"p", rows}, {"p_single", vec.p_single}};
        if (with_oracle) results["max_abs_diff"] = max_abs_diff;
        std::cout << kdchoice::render_document(
            "pvector", {{"n", n}, {"k", k}, {"d", d}, {"oracle", with_oracle}}, results,
            common.seed);
    }
    return 0;
}

int run_intersect(std::uint32_t n, std::uint32_t k, std::uint32_t d, std::uint64_t trials,
                  std::uint32_t jobs, const CommonFlags& common) {
    const kdchoice::IntersectionResult analytic = kdchoice::intersect_x_star(n, k, d);

    json results = {{"analytic", kdchoice::to_json(analytic)}};
    std::optional<std::uint32_t> median;
    if (trials > 0) {
        kdchoice::ExperimentConfig config;
        config.params.n = n;
        config.params.m = n;
        config.params.k = k;
        config.params.d = d;
        config.params.seed = common.seed;
        config.trials = trials;
        config.parallelism = jobs;
        config.paired_single = true;
        const kdchoice::ExperimentReport report = kdchoice::run_trials(config);
        median = report.stats.median_intersection();
        results["empirical"] = {
            {"trials", trials},
            {"median", median ? json(*median) : json(nullptr)},
            {"histogram", kdchoice::histogram_json(
                              report.stats.intersection_histogram)}};
    }

    if (common.format == "csv") {
        std::vector<std::pair<std::string, std::string>> rows = {
            {"x_star", std::to_string(analytic.x_star)},
            {"lower_bound", format_double(analytic.lower_bound)},
            {"upper_bound",
             analytic.upper_bound ? format_double(*analytic.upper_bound) : "undefined"},
            {"d_k", format_double(analytic.d_k)},
        };
        if (median) rows.emplace_back("empirical_median", std::to_string(*median));
        std::cout << kdchoice::render_kv_csv(rows);
    } else {
        std::cout << kdchoice::render_document(
            "intersect", {{"n", n}, {"k", k}, {"d", d}, {"trials", trials}}, results, common.seed);
    }
    return 0;
}

int run_bounds(std::uint32_t n, std::uint32_t k, std::uint32_t d, double dk_threshold,
               const CommonFlags& common) {
    const kdchoice::BoundReport report = kdchoice::max_load_bound(n, k, d, dk_threshold);
    const kdchoice::GammaSequence gamma = kdchoice::gamma_sequence(n, k, d);

    if (common.format == "csv") {
        std::cout << kdchoice::render_kv_csv({
            {"d_k", format_double(report.d_k)},
            {"regime", kdchoice::to_string(report.regime)},
            {"leading_bound", format_double(report.leading_bound)},
            {"bounded_dk_leading", format_double(report.bounded_dk_leading)},
            {"growing_dk_leading", format_double(report.growing_dk_leading)},
            {"y_star_est", std::to_string(report.y_star_est)},
            {"y_hat_upper", format_double(report.y_hat_upper)},
            {"y_hat_lower", format_double(report.y_hat_lower)},
            {"gamma_depth", std::to_string(report.gamma_depth)},
        });
    } else {
        json results = kdchoice::to_json(report);
        results["gamma_sequence"] = gamma.values;
        std::cout << kdchoice::render_document(
            "bounds", {{"n", n}, {"k", k}, {"d", d}, {"dk_threshold", dk_threshold}}, results,
            common.seed);
    }
    return 0;
}

int run_sweep(const std::vector<std::string>& point_specs, std::uint64_t trials,
              std::uint32_t jobs, double slack, const CommonFlags& common) {
    std::vector<kdchoice::SweepPoint> grid;
    for (const std::string& spec : point_specs) {
        kdchoice::SweepPoint point;
        char c1 = 0;
        char c2 = 0;
        std::istringstream in(spec);
        if (!(in >> point.n >> c1 >> point.k >> c2 >> point.d) || c1 != ',' || c2 != ',') {
            throw CLI::ValidationError("--point", "expected n,k,d but got '" + spec + "'");
        }
        grid.push_back(point);
    }
    const std::vector<kdchoice::SweepRow> rows =
        kdchoice::sweep(grid, trials, common.seed, slack, jobs);

    if (common.format == "csv") {
        std::cout << kdchoice::render_sweep_csv(rows);
    } else {
        json out = json::array();
        for (const kdchoice::SweepRow& row : rows) out.push_back(kdchoice::to_json(row));
        std::cout << kdchoice::render_document(
            "sweep", {{"points", point_specs}, {"trials", trials}, {"slack", slack}}, out,
            common.seed);
    }
    for (const kdchoice::SweepRow& row : rows) {
        if (row.verdict == kdchoice::VerdictStatus::Fail) return 1;
    }
    return 0;
}

int run_storage(std::uint32_t servers, std::uint64_t files, std::uint32_t k, std::uint32_t d,
                const std::string& mode_name, std::uint32_t searches, const CommonFlags& common) {
    const kdchoice::PlacementMode mode = mode_name == "chunk" ? kdchoice::PlacementMode::Chunk
                                                              : kdchoice::PlacementMode::Replicate;
    kdchoice::StorageSim sim(servers, common.seed);
    std::vector<kdchoice::FileRecord> records;
    records.reserve(files);
    for (std::uint64_t id = 0; id < files; ++id) {
        records.push_back(kdchoice::insert_file(sim, id, mode, k, d));
    }
    const kdchoice::SearchStats stats = kdchoice::measure_search_cost(sim, records, searches);

    const std::uint32_t max_server_load =
        *std::max_element(sim.server_loads().begin(), sim.server_loads().end());
    const double exact_expectation = kdchoice::replicate_search_expectation(k, d);
    const double coarse_estimate = static_cast<double>(d) / static_cast<double>(k);

    if (common.format == "csv") {
        std::cout << kdchoice::render_kv_csv({
            {"servers", std::to_string(servers)},
            {"files", std::to_string(files)},
            {"mode", mode_name},
            {"mean_probes", format_double(stats.mean_probes)},
            {"searches", std::to_string(stats.searches)},
            {"max_server_load", std::to_string(max_server_load)},
            {"replicate_expectation", format_double(exact_expectation)},
            {"d_over_k", format_double(coarse_estimate)},
        });
    } else {
        json results = {{"search", kdchoice::to_json(stats)},
                        {"max_server_load", max_server_load},
                        {"total_stored", sim.total_stored()},
                        {"replicate_expectation", exact_expectation},
                        {"d_over_k", coarse_estimate}};
        std::cout << kdchoice::render_document("storage",
                                               {{"servers", servers},
                                                {"files", files},
                                                {"k", k},
                                                {"d", d},
                                                {"mode", mode_name},
                                                {"searches", searches}},
                                               results, common.seed);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"(k,d)-choice balls-into-bins toolkit"};
    app.require_subcommand(1);

    CommonFlags common;
    std::uint32_t n = 1024;
    std::uint64_t m = 0; // 0 = default to n
    std::uint32_t k = 1;
    std::uint32_t d = 2;
    std::uint64_t trials = 20;
    std::uint32_t jobs = 1;
    double slack = 4.0;
    double dk_threshold = 16.0;
    std::string strategy = "kd";
    std::string tie = "index";
    std::string mode = "replicate";
    std::uint32_t searches = 1;
    bool with_oracle = false;
    bool paired_single = false;
    std::vector<std::uint32_t> probes;
    std::vector<std::string> points;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", common.seed, "master RNG seed");
        cmd->add_option("--format", common.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* sim = app.add_subcommand("simulate", "run a battery of allocation trials");
    sim->add_option("--n", n, "bins")->required();
    sim->add_option("--m", m, "balls (default n)");
    sim->add_option("--k", k, "balls per round");
    sim->add_option("--d", d, "samples per round");
    sim->add_option("--strategy", strategy, "allocation strategy")
        ->check(CLI::IsMember({"kd", "optimal", "single"}));
    sim->add_option("--tie", tie, "tie-break policy")->check(CLI::IsMember({"index", "random"}));
    sim->add_option("--trials", trials, "number of trials");
    sim->add_option("--jobs", jobs, "worker threads");
    sim->add_option("--slack", slack, "additive slack on O(1) terms");
    sim->add_option("--probe", probes, "y values for nu/mu curves");
    sim->add_flag("--paired-single", paired_single, "also run paired single-choice trials");
    add_common(sim);

    CLI::App* pvec = app.add_subcommand("pvector", "per-rank hit probabilities");
    pvec->add_option("--n", n, "bins")->required();
    pvec->add_option("--k", k, "balls per round")->required();
    pvec->add_option("--d", d, "samples per round")->required();
    pvec->add_flag("--oracle", with_oracle, "cross-check against the enumeration oracle");
    add_common(pvec);

    CLI::App* inter = app.add_subcommand("intersect", "crossing point of the probability vectors");
    inter->add_option("--n", n, "bins")->required();
    inter->add_option("--k", k, "balls per round")->required();
    inter->add_option("--d", d, "samples per round")->required();
    inter->add_option("--trials", trials, "paired trials for the empirical crossing (0 = skip)");
    inter->add_option("--jobs", jobs, "worker threads");
    add_common(inter);

    CLI::App* bnd = app.add_subcommand("bounds", "closed-form max-load bounds");
    bnd->add_option("--n", n, "bins")->required();
    bnd->add_option("--k", k, "balls per round")->required();
    bnd->add_option("--d", d, "samples per round")->required();
    bnd->add_option("--dk-threshold", dk_threshold, "regime threshold for d_k");
    add_common(bnd);

    CLI::App* swp = app.add_subcommand("sweep", "batteries over a parameter grid");
    swp->add_option("--point", points, "grid point n,k,d (repeatable)")->required();
    swp->add_option("--trials", trials, "trials per point");
    swp->add_option("--jobs", jobs, "worker threads");
    swp->add_option("--slack", slack, "additive slack on O(1) terms");
    add_common(swp);

    CLI::App* sto = app.add_subcommand("storage", "file placement and search-cost simulation");
    sto->add_option("--n", n, "servers")->required();
    sto->add_option("--m", m, "files (default n)");
    sto->add_option("--k", k, "copies/chunks per file")->required();
    sto->add_option("--d", d, "candidate servers per file")->required();
    sto->add_option("--mode", mode, "placement mode")
        ->check(CLI::IsMember({"replicate", "chunk"}));
    sto->add_option("--searches", searches, "searches per file");
    add_common(sto);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            kdchoice::ExperimentConfig config;
            config.params.n = n;
            config.params.m = m == 0 ? n : m;
            config.params.k = k;
            config.params.d = d;
            config.params.strategy = strategy == "optimal" ? kdchoice::Strategy::OptimalKd
                                                           : kdchoice::Strategy::KdChoice;
            config.params.tie_break = tie == "random" ? kdchoice::TieBreak::RandomAmongTies
                                                      : kdchoice::TieBreak::LowestBinIndex;
            config.params.seed = common.seed;
            config.trials = trials;
            config.parallelism = jobs;
            config.probes = probes;
            config.paired_single = paired_single;
            config.single_choice = strategy == "single";
            config.slack = slack;
            return run_simulate(config, common, strategy);
        }
        if (pvec->parsed()) return run_pvector(n, k, d, with_oracle, common);
        if (inter->parsed()) return run_intersect(n, k, d, trials, jobs, common);
        if (bnd->parsed()) return run_bounds(n, k, d, dk_threshold, common);
        if (swp->parsed()) return run_sweep(points, trials, jobs, slack, common);
        if (sto->parsed()) {
            return run_storage(n, m == 0 ? n : m, k, d, mode, searches, common);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
