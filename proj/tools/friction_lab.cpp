// friction_lab: batch CLI over the friction/legitimacy toolkit.
//
// Subcommands: kernel eval|alloc, estimate <mode>, rom simulate|stationary,
// dyn rate|lyapunov, coarse check|grain, marl run, analyze, plot heatmap.
// Every subcommand reads a JSON config (--config), writes files atomically
// under --out, and reports errors as machine-readable JSON on stdout.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "frictionlab/analysis.hpp"
#include "frictionlab/coarse.hpp"
#include "frictionlab/csv.hpp"
#include "frictionlab/dynamics.hpp"
#include "frictionlab/errors.hpp"
#include "frictionlab/estimators.hpp"
#include "frictionlab/kernel.hpp"
#include "frictionlab/log.hpp"
#include "frictionlab/marl.hpp"
#include "frictionlab/rom.hpp"
#include "frictionlab/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frictionlab;

namespace {

struct CliError : Error {
    CliError(const std::string& kind_, const std::string& msg) : Error(msg), kind(kind_) {}
    std::string kind;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError("missing-file", "cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw CliError("config-parse", std::string("config is not valid JSON: ") + e.what());
    }
    return doc;
}

// Field access with path-qualified error messages.
const json& field(const json& doc, const std::string& name) {
    if (!doc.contains(name)) throw CliError("config-schema", "missing config field: " + name);
    return doc.at(name);
}

double number_field(const json& doc, const std::string& name) {
    const json& v = field(doc, name);
    if (!v.is_number()) throw CliError("config-schema", "field must be a number: " + name);
    return v.get<double>();
}

double number_or(const json& doc, const std::string& name, double fallback) {
    if (!doc.contains(name)) return fallback;
    return number_field(doc, name);
}

std::string string_field(const json& doc, const std::string& name) {
    const json& v = field(doc, name);
    if (!v.is_string()) throw CliError("config-schema", "field must be a string: " + name);
    return v.get<std::string>();
}

std::vector<double> vector_field(const json& doc, const std::string& name) {
    const json& v = field(doc, name);
    if (!v.is_array()) throw CliError("config-schema", "field must be an array: " + name);
    return v.get<std::vector<double>>();
}

// Atomic write: temp file in the target directory, then rename.
void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw CliError("io", "cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

csv::Table read_csv_file(const std::string& path) {
    if (!fs::exists(path)) throw CliError("missing-file", "input file does not exist: " + path);
    return csv::read_file(path);
}

rom::RomSystem load_system(const json& cfg) {
    const json& sys = field(cfg, "system");
    if (sys.is_string()) {
        const std::string path = sys.get<std::string>();
        std::ifstream in(path);
        if (!in) throw CliError("missing-file", "cannot open system file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return rom::RomSystem::from_json(buf.str());
    }
    return rom::RomSystem::from_json(sys.dump());
}

dynamics::PiecewiseLinear load_path(const json& cfg, const std::string& name) {
    const json& raw = field(cfg, name);
    std::vector<std::pair<double, double>> points;
    for (const auto& entry : raw) {
        if (!entry.is_array() || entry.size() != 2) {
            throw CliError("config-schema", name + " must be a list of [time, value] pairs");
        }
        points.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    return dynamics::PiecewiseLinear(std::move(points));
}

// ---------------------------------------------------------------- kernel --

int cmd_kernel_eval(const json& cfg) {
    const kernel::KernelTriple k(number_field(cfg, "alpha"), number_field(cfg, "sigma"),
                                 number_field(cfg, "epsilon"));
    json out;
    out["friction"] = kernel::friction(k);
    const auto partials = kernel::friction_partials(k);
    out["partials"] = {{"d_sigma", partials.d_sigma},
                       {"d_alpha", partials.d_alpha},
                       {"d_epsilon", partials.d_epsilon}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_kernel_alloc(const json& cfg) {
    kernel::SystemTable table;
    table.stakes = field(cfg, "stakes").get<std::vector<std::vector<double>>>();
    table.alignments =
        field(cfg, "alignments").get<std::vector<std::vector<std::vector<double>>>>();
    table.entropies = field(cfg, "entropies").get<std::vector<std::vector<double>>>();
    const kernel::AllocationResult result = kernel::friction_aware_allocation(table);
    json out;
    out["assignment"] = result.assignment;
    out["objective"] = result.objective;
    std::cout << out.dump() << "\n";
    return 0;
}

// -------------------------------------------------------------- estimate --

double run_estimate(const std::string& mode, const json& cfg) {
    using namespace estimators;
    if (mode == "survey") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        return alignment_survey(t.numeric_column(string_field(cfg, "agent_col")),
                                t.numeric_column(string_field(cfg, "holder_col")));
    }
    if (mode == "market") {
        return alignment_market(number_field(cfg, "delta_holdings"), number_field(cfg, "lambda"));
    }
    if (mode == "vote") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        const auto shares = t.numeric_column(string_field(cfg, "share_col"));
        std::vector<std::string> position_cols =
            field(cfg, "position_cols").get<std::vector<std::string>>();
        std::vector<Party> parties;
        for (std::size_t i = 0; i < shares.size(); ++i) {
            Party p;
            p.vote_share = shares[i];
            for (const auto& col : position_cols) p.position.push_back(t.number(i, t.column(col)));
            parties.push_back(std::move(p));
        }
        return alignment_vote(parties, vector_field(cfg, "government"));
    }
    if (mode == "monetary") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        const auto wealth = t.numeric_column(string_field(cfg, "wealth_col"));
        const auto prob = t.numeric_column(string_field(cfg, "probability_col"));
        std::vector<Outcome> outcomes;
        for (std::size_t i = 0; i < wealth.size(); ++i) outcomes.push_back({wealth[i], prob[i]});
        return stake_monetary(outcomes);
    }
    if (mode == "present_value") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        return stake_present_value(t.numeric_column(string_field(cfg, "stake_col")),
                                   number_field(cfg, "delta"));
    }
    if (mode == "computational") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        return stake_computational(t.numeric_column(string_field(cfg, "loss_col")),
                                   number_field(cfg, "sensitivity"));
    }
    if (mode == "political") {
        PoliticalStakeWeights weights;
        if (cfg.contains("weights")) {
            const json& w = cfg.at("weights");
            weights.proximity = number_field(w, "proximity");
            weights.reversibility = number_field(w, "reversibility");
            weights.magnitude = number_field(w, "magnitude");
        }
        return stake_political(number_field(cfg, "proximity"), number_field(cfg, "reversibility"),
                               number_field(cfg, "magnitude"), weights);
    }
    if (mode == "kl") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        return entropy_kl(t.numeric_column(string_field(cfg, "truth_col")),
                          t.numeric_column(string_field(cfg, "estimate_col")));
    }
    if (mode == "channel") {
        // long format: one row per (x, y) pair with its probability
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        const std::size_t xc = t.column(string_field(cfg, "x_col"));
        const std::size_t yc = t.column(string_field(cfg, "y_col"));
        const std::size_t pc = t.column(string_field(cfg, "p_col"));
        std::map<std::string, std::size_t> xs, ys;
        for (std::size_t i = 0; i < t.row_count(); ++i) {
            xs.emplace(t.cell(i, xc), xs.size());
            ys.emplace(t.cell(i, yc), ys.size());
        }
        std::vector<std::vector<double>> joint(xs.size(), std::vector<double>(ys.size(), 0.0));
        for (std::size_t i = 0; i < t.row_count(); ++i) {
            joint[xs[t.cell(i, xc)]][ys[t.cell(i, yc)]] += t.number(i, pc);
        }
        return entropy_channel(DiscreteJoint(std::move(joint)));
    }
    if (mode == "misperception") {
        const csv::Table t = read_csv_file(string_field(cfg, "csv"));
        const auto true_cols = field(cfg, "true_cols").get<std::vector<std::string>>();
        const auto est_cols = field(cfg, "estimate_cols").get<std::vector<std::string>>();
        std::vector<PreferenceVector> truth(t.row_count()), est(t.row_count());
        for (std::size_t i = 0; i < t.row_count(); ++i) {
            for (const auto& col : true_cols) truth[i].push_back(t.number(i, t.column(col)));
            for (const auto& col : est_cols) est[i].push_back(t.number(i, t.column(col)));
        }
        return entropy_misperception(truth, est);
    }
    if (mode == "volatility") {
        if (cfg.contains("csv")) {
            const csv::Table t = read_csv_file(string_field(cfg, "csv"));
            ReturnSeries series(t.numeric_column(string_field(cfg, "timestamp_col")),
                                t.numeric_column(string_field(cfg, "return_col")));
            const auto baseline = vector_field(cfg, "baseline_window");
            const auto event = vector_field(cfg, "event_window");
            if (baseline.size() != 2 || event.size() != 2) {
                throw CliError("config-schema", "windows must be [begin, end) index pairs");
            }
            return proxy_volatility(series, static_cast<std::size_t>(baseline[0]),
                                    static_cast<std::size_t>(baseline[1]),
                                    static_cast<std::size_t>(event[0]),
                                    static_cast<std::size_t>(event[1]));
        }
        return proxy_volatility(number_field(cfg, "realized"), number_field(cfg, "baseline"));
    }
    if (mode == "institutional") {
        return proxy_institutional(vector_field(cfg, "components"), vector_field(cfg, "weights"));
    }
    if (mode == "coordination") {
        return proxy_coordination(number_field(cfg, "achieved"), number_field(cfg, "optimal"));
    }
    if (mode == "overhead") {
        return proxy_overhead(number_field(cfg, "coordination_cost"),
                              number_field(cfg, "total_cost"));
    }
    throw CliError("unknown-subcommand", "unknown estimate mode: " + mode);
}

// ------------------------------------------------------------------- rom --

int cmd_rom_simulate(const json& cfg, const fs::path& out_dir) {
    const rom::RomSystem sys = load_system(cfg);
    const rom::Population p0(vector_field(cfg, "p0"));
    const double dt = number_field(cfg, "dt");
    const long steps = static_cast<long>(number_field(cfg, "steps"));
    const long record_every = static_cast<long>(number_or(cfg, "record_every", 1));
    if (record_every < 1) throw CliError("config-schema", "record_every must be >= 1");

    const auto trajectory = rom::rom_integrate(p0, sys, dt, steps);

    std::vector<std::string> header = {"step", "time"};
    for (std::size_t i = 0; i < sys.type_count(); ++i) header.push_back("p" + std::to_string(i));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < trajectory.size(); s += static_cast<std::size_t>(record_every)) {
        std::vector<std::string> row = {std::to_string(s),
                                        csv::format_double(dt * static_cast<double>(s))};
        for (std::size_t i = 0; i < sys.type_count(); ++i) {
            row.push_back(csv::format_double(trajectory[s][i]));
        }
        rows.push_back(std::move(row));
    }
    const fs::path out_path = out_dir / cfg.value("output", std::string("trajectory.csv"));
    write_atomic(out_path, csv::emit(csv::Table(std::move(header), std::move(rows))));

    json out;
    out["output"] = out_path.string();
    out["final"] = trajectory.back().probs();
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_rom_stationary(const json& cfg) {
    const rom::RomSystem sys = load_system(cfg);
    const auto result = rom::stationary_distribution(
        sys, number_or(cfg, "tol", 1e-10), static_cast<long>(number_or(cfg, "max_iters", 1e6)));
    json out;
    out["distribution"] = result.distribution.probs();
    out["residual"] = result.residual;
    out["iterations"] = result.iterations;
    std::cout << out.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------- dyn --

int cmd_dyn_rate(const json& cfg) {
    const kernel::KernelTriple k(number_field(cfg, "alpha"), number_field(cfg, "sigma"),
                                 number_field(cfg, "epsilon"));
    const double rate = dynamics::friction_rate(k, number_field(cfg, "d_sigma"),
                                                number_field(cfg, "d_alpha"),
                                                number_field(cfg, "d_epsilon"));
    json out;
    out["friction_rate"] = rate;
    out["equilibrium_residual"] = rate;
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_dyn_lyapunov(const json& cfg) {
    dynamics::ParameterPath path(load_path(cfg, "sigma_path"), load_path(cfg, "alpha_path"),
                                 load_path(cfg, "epsilon_path"));
    const auto report = dynamics::lyapunov_check(
        path, number_field(cfg, "horizon"), static_cast<int>(number_field(cfg, "samples")),
        number_field(cfg, "sigma_max"));
    json out;
    out["sigma_bounded"] = report.sigma_bounded;
    out["alignment_improving"] = report.alignment_improving;
    out["entropy_nonincreasing"] = report.entropy_nonincreasing;
    out["sigma_static"] = report.sigma_static;
    out["friction_nonincreasing"] = report.friction_nonincreasing;
    out["conditions_hold"] = report.conditions_hold();
    out["violations"] = json::array();
    for (const auto& v : report.violations) {
        out["violations"].push_back({{"time", v.time}, {"condition", v.condition},
                                     {"value", v.value}});
    }
    std::cout << out.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------- coarse --

coarse::Partition load_partition(const json& cfg) {
    return coarse::Partition(field(cfg, "partition").get<std::vector<std::size_t>>());
}

int cmd_coarse_check(const json& cfg) {
    const rom::RomSystem sys = load_system(cfg);
    const auto report =
        coarse::check_lumpability(sys, load_partition(cfg), number_or(cfg, "tol", 1e-9));
    json out;
    out["transition_uniform"] = report.transition_uniform;
    out["transition_worst"] = report.transition_worst;
    out["survival_homogeneous"] = report.survival_homogeneous;
    out["survival_worst"] = report.survival_worst;
    out["weighted_flow_uniform"] = report.weighted_flow_uniform;
    out["weighted_worst"] = report.weighted_worst;
    out["tolerance"] = report.tolerance;
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_coarse_grain(const json& cfg) {
    const rom::RomSystem sys = load_system(cfg);
    const rom::Population p(vector_field(cfg, "p"));
    const rom::RomSystem coarse_sys =
        coarse::coarse_grain(sys, load_partition(cfg), p, number_or(cfg, "tol", 1e-9));
    std::cout << coarse_sys.to_json() << "\n";
    return 0;
}

// ------------------------------------------------------------------ marl --

marl::EnvConfig parse_env(const json& cfg) {
    marl::EnvConfig env = marl::EnvConfig::defaults(
        static_cast<int>(number_or(cfg, "n_agents", 2)),
        static_cast<int>(number_or(cfg, "m_resources", 2)));
    if (cfg.contains("capacity")) env.capacity = vector_field(cfg, "capacity");
    env.step_size = number_or(cfg, "step_size", env.step_size);
    env.episode_length = static_cast<int>(number_or(cfg, "episode_length", env.episode_length));
    if (cfg.contains("initial_state")) env.initial_state = vector_field(cfg, "initial_state");
    return env;
}

marl::AgentConfig parse_agent(const json& cfg) {
    marl::AgentConfig agent;
    const std::string kind = cfg.value("approximator", std::string("mlp"));
    if (kind == "tabular") {
        agent.approximator = marl::Approximator::tabular;
    } else if (kind == "mlp") {
        agent.approximator = marl::Approximator::mlp;
    } else {
        throw CliError("config-schema", "approximator must be 'tabular' or 'mlp'");
    }
    agent.tabular_bins = static_cast<int>(number_or(cfg, "tabular_bins", agent.tabular_bins));
    agent.mlp_hidden = static_cast<int>(number_or(cfg, "mlp_hidden", agent.mlp_hidden));
    agent.mlp_layers = static_cast<int>(number_or(cfg, "mlp_layers", agent.mlp_layers));
    agent.learn_rate = number_or(cfg, "learn_rate", agent.learn_rate);
    agent.discount = number_or(cfg, "discount", agent.discount);
    agent.explore_start = number_or(cfg, "explore_start", agent.explore_start);
    agent.explore_end = number_or(cfg, "explore_end", agent.explore_end);
    agent.episodes = static_cast<int>(number_or(cfg, "episodes", agent.episodes));
    agent.probe_points = static_cast<int>(number_or(cfg, "probe_points", agent.probe_points));
    return agent;
}

int cmd_marl_run(const json& cfg, const fs::path& out_dir,
                 const std::optional<std::uint64_t>& seed_override, int workers) {
    const json& design_cfg = field(cfg, "design");
    marl::ExperimentDesign design;
    if (design_cfg.contains("alpha_levels")) {
        design.alpha_levels = vector_field(design_cfg, "alpha_levels");
    }
    if (design_cfg.contains("sigma_levels")) {
        design.sigma_levels = vector_field(design_cfg, "sigma_levels");
    }
    if (design_cfg.contains("epsilon_levels")) {
        design.epsilon_levels = vector_field(design_cfg, "epsilon_levels");
    }
    design.replications =
        static_cast<int>(number_or(design_cfg, "replications", design.replications));
    design.master_seed = design_cfg.contains("master_seed")
                             ? design_cfg.at("master_seed").get<std::uint64_t>()
                             : design.master_seed;
    if (seed_override) design.master_seed = *seed_override;

    const marl::EnvConfig env = parse_env(cfg.contains("env") ? cfg.at("env") : json::object());
    const marl::AgentConfig agent =
        parse_agent(cfg.contains("agent") ? cfg.at("agent") : json::object());

    log::info("running " + std::to_string(design.condition_count()) + " conditions x " +
              std::to_string(design.replications) + " replications on " +
              std::to_string(workers) + " worker(s)");
    const auto records = marl::run_experiment(design, env, agent, workers);

    const fs::path out_path = out_dir / cfg.value("output", std::string("metrics.csv"));
    write_atomic(out_path, marl::records_to_csv(records));

    std::size_t failures = 0;
    for (const auto& r : records) {
        if (r.status != "ok") ++failures;
    }
    json out;
    out["output"] = out_path.string();
    out["records"] = records.size();
    out["failures"] = failures;
    std::cout << out.dump() << "\n";
    return 0;
}

// --------------------------------------------------------------- analyze --

int cmd_analyze(const json& cfg, const fs::path& out_dir,
                const std::optional<std::uint64_t>& seed_override) {
    const std::string csv_path = string_field(cfg, "csv");
    if (!fs::exists(csv_path)) {
        throw CliError("missing-file", "metrics CSV does not exist: " + csv_path);
    }
    std::ifstream in(csv_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto records = marl::records_from_csv(buf.str());

    const std::string proxy = cfg.value("proxy", std::string("reward_gap"));
    const int permutations = static_cast<int>(number_or(cfg, "permutations", 1000));
    const std::uint64_t seed =
        seed_override ? *seed_override
                      : (cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1234);

    const auto hypotheses = analysis::test_hypotheses(records, proxy, permutations, seed);
    const auto models = analysis::compare_models(records, proxy);
    const auto full = analysis::full_regression(records, proxy);

    json report;
    report["proxy"] = proxy;
    report["n_records"] = records.size();
    report["hypotheses"] = json::array();
    for (const auto& h : hypotheses) {
        report["hypotheses"].push_back({{"id", h.id},
                                        {"statistic", h.statistic},
                                        {"p_value", h.p_value},
                                        {"direction_satisfied", h.direction_satisfied},
                                        {"degenerate", h.degenerate},
                                        {"r_squared", h.r_squared}});
    }
    report["models"] = json::array();
    for (const auto& m : models) {
        report["models"].push_back({{"model", analysis::model_name(m.model)},
                                    {"aic", m.fit.aic},
                                    {"bic", m.fit.bic},
                                    {"r_squared", m.fit.r_squared},
                                    {"delta_aic", m.delta_aic}});
    }
    report["full_regression"] = {{"coefficients", full.coefficients},
                                 {"std_errors", full.std_errors},
                                 {"r_squared", full.r_squared},
                                 {"aic", full.aic},
                                 {"bic", full.bic},
                                 {"n_observations", full.n_observations}};

    const fs::path report_path = out_dir / cfg.value("report", std::string("analysis.json"));
    write_atomic(report_path, report.dump(2) + "\n");

    // coefficient table for the full regression and each model
    std::vector<std::vector<std::string>> rows;
    const std::vector<std::string> full_names = {"intercept", "friction", "alpha", "sigma",
                                                 "epsilon"};
    for (std::size_t i = 0; i < full.coefficients.size(); ++i) {
        rows.push_back({"full", full_names[i], csv::format_double(full.coefficients[i]),
                        csv::format_double(full.std_errors[i])});
    }
    for (const auto& m : models) {
        for (std::size_t i = 0; i < m.fit.coefficients.size(); ++i) {
            rows.push_back({analysis::model_name(m.model), "b" + std::to_string(i),
                            csv::format_double(m.fit.coefficients[i]),
                            csv::format_double(m.fit.std_errors[i])});
        }
    }
    const fs::path coef_path = out_dir / cfg.value("coefficients", std::string("coefficients.csv"));
    write_atomic(coef_path,
                 csv::emit(csv::Table({"model", "term", "estimate", "std_error"}, rows)));

    json out;
    out["report"] = report_path.string();
    out["coefficients"] = coef_path.string();
    for (const auto& h : hypotheses) {
        out["hypotheses"][h.id] = {{"statistic", h.statistic}, {"p_value", h.p_value},
                                   {"direction_satisfied", h.direction_satisfied}};
    }
    std::cout << out.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------ plot --

int cmd_plot_heatmap(const json& cfg, const fs::path& out_dir) {
    const std::string csv_path = string_field(cfg, "csv");
    if (!fs::exists(csv_path)) {
        throw CliError("missing-file", "metrics CSV does not exist: " + csv_path);
    }
    std::ifstream in(csv_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto records = marl::records_from_csv(buf.str());
    if (records.empty()) throw CliError("config-schema", "metrics CSV has no records");

    const std::string x_factor = cfg.value("x_factor", std::string("alpha"));
    const std::string y_factor = cfg.value("y_factor", std::string("sigma"));
    const std::string metric = cfg.value("metric", std::string("reward_gap"));

    const auto factor_of = [](const marl::MetricsRecord& r, const std::string& name) {
        if (name == "alpha") return r.alpha;
        if (name == "sigma") return r.sigma;
        if (name == "epsilon") return r.epsilon;
        throw CliError("config-schema", "unknown factor: " + name);
    };
    const auto metric_of = [](const marl::MetricsRecord& r, const std::string& name) {
        if (name == "reward_gap") return r.reward_gap;
        if (name == "policy_variance") return r.policy_variance;
        if (name == "pareto_inefficiency") return r.pareto_inefficiency;
        if (name == "measured_alignment") return r.measured_alignment;
        if (name == "theoretical_friction") return r.theoretical_friction;
        throw CliError("config-schema", "unknown metric: " + name);
    };

    std::vector<double> x_levels, y_levels;
    for (const auto& r : records) {
        const double x = factor_of(r, x_factor);
        const double y = factor_of(r, y_factor);
        if (std::find(x_levels.begin(), x_levels.end(), x) == x_levels.end()) {
            x_levels.push_back(x);
        }
        if (std::find(y_levels.begin(), y_levels.end(), y) == y_levels.end()) {
            y_levels.push_back(y);
        }
    }
    std::sort(x_levels.begin(), x_levels.end());
    std::sort(y_levels.begin(), y_levels.end());

    std::vector<std::vector<double>> sums(y_levels.size(),
                                          std::vector<double>(x_levels.size(), 0.0));
    std::vector<std::vector<int>> counts(y_levels.size(), std::vector<int>(x_levels.size(), 0));
    for (const auto& r : records) {
        if (r.status != "ok") continue;
        const auto xi = static_cast<std::size_t>(
            std::find(x_levels.begin(), x_levels.end(), factor_of(r, x_factor)) -
            x_levels.begin());
        const auto yi = static_cast<std::size_t>(
            std::find(y_levels.begin(), y_levels.end(), factor_of(r, y_factor)) -
            y_levels.begin());
        sums[yi][xi] += metric_of(r, metric);
        counts[yi][xi] += 1;
    }

    std::vector<std::string> missing;
    svg::HeatmapData data;
    data.title = metric + " by " + x_factor + " x " + y_factor;
    data.x_label = x_factor;
    data.y_label = y_factor;
    data.cells.assign(y_levels.size(), std::vector<double>(x_levels.size(), 0.0));
    for (std::size_t yi = 0; yi < y_levels.size(); ++yi) {
        for (std::size_t xi = 0; xi < x_levels.size(); ++xi) {
            if (counts[yi][xi] == 0) {
                missing.push_back("(" + csv::format_double(x_levels[xi]) + ", " +
                                  csv::format_double(y_levels[yi]) + ")");
            } else {
                data.cells[yi][xi] = sums[yi][xi] / counts[yi][xi];
            }
        }
    }
    if (!missing.empty()) {
        std::string joined;
        for (const auto& cell : missing) {
            if (!joined.empty()) joined += ", ";
            joined += cell;
        }
        throw CliError("incomplete-grid", "missing grid cells: " + joined);
    }
    for (double x : x_levels) data.x_ticks.push_back(csv::format_double(x));
    for (double y : y_levels) data.y_ticks.push_back(csv::format_double(y));

    const fs::path out_path = out_dir / cfg.value("output", std::string("heatmap.svg"));
    write_atomic(out_path, svg::render_heatmap(data));
    json out;
    out["output"] = out_path.string();
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"friction_lab: consent-friction simulation and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int workers = 1;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
    app.add_option("--workers", workers, "parallel workers for the sweep runner");

    auto* kernel_cmd = app.add_subcommand("kernel", "friction algebra");
    auto* kernel_eval = kernel_cmd->add_subcommand("eval", "evaluate friction for a triple");
    auto* kernel_alloc = kernel_cmd->add_subcommand("alloc", "friction-minimizing allocation");
    kernel_cmd->require_subcommand(1);

    auto* estimate_cmd = app.add_subcommand("estimate", "measurement-apparatus estimators");
    std::string estimate_mode;
    estimate_cmd->add_option("mode", estimate_mode, "estimator mode")->required();

    auto* rom_cmd = app.add_subcommand("rom", "replicator-optimization dynamics");
    auto* rom_simulate = rom_cmd->add_subcommand("simulate", "integrate a system");
    auto* rom_stationary = rom_cmd->add_subcommand("stationary", "stationary distribution");
    rom_cmd->require_subcommand(1);

    auto* dyn_cmd = app.add_subcommand("dyn", "friction/legitimacy dynamics");
    auto* dyn_rate = dyn_cmd->add_subcommand("rate", "friction rate along derivatives");
    auto* dyn_lyapunov = dyn_cmd->add_subcommand("lyapunov", "Lyapunov condition check");
    dyn_cmd->require_subcommand(1);

    auto* coarse_cmd = app.add_subcommand("coarse", "coarse-graining");
    auto* coarse_check = coarse_cmd->add_subcommand("check", "lumpability report");
    auto* coarse_grain_cmd = coarse_cmd->add_subcommand("grain", "induced coarse system");
    coarse_cmd->require_subcommand(1);

    auto* marl_cmd = app.add_subcommand("marl", "factorial validation experiment");
    auto* marl_run = marl_cmd->add_subcommand("run", "run the factorial sweep");
    marl_cmd->require_subcommand(1);

    auto* analyze_cmd = app.add_subcommand("analyze", "statistical analysis of metrics");
    auto* plot_cmd = app.add_subcommand("plot", "plots");
    auto* plot_heatmap = plot_cmd->add_subcommand("heatmap", "condition-grid heatmap");
    plot_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) seed = seed_value;

    try {
        const json cfg = load_config(config_path);
        const fs::path out(out_dir);
        if (kernel_eval->parsed()) return cmd_kernel_eval(cfg);
        if (kernel_alloc->parsed()) return cmd_kernel_alloc(cfg);
        if (estimate_cmd->parsed()) {
            json out_doc;
            out_doc["mode"] = estimate_mode;
            out_doc["estimate"] = run_estimate(estimate_mode, cfg);
            std::cout << out_doc.dump() << "\n";
            return 0;
        }
        if (rom_simulate->parsed()) return cmd_rom_simulate(cfg, out);
        if (rom_stationary->parsed()) return cmd_rom_stationary(cfg);
        if (dyn_rate->parsed()) return cmd_dyn_rate(cfg);
        if (dyn_lyapunov->parsed()) return cmd_dyn_lyapunov(cfg);
        if (coarse_check->parsed()) return cmd_coarse_check(cfg);
        if (coarse_grain_cmd->parsed()) return cmd_coarse_grain(cfg);
        if (marl_run->parsed()) return cmd_marl_run(cfg, out, seed, workers);
        if (analyze_cmd->parsed()) return cmd_analyze(cfg, out, seed);
        if (plot_heatmap->parsed()) return cmd_plot_heatmap(cfg, out);
        throw CliError("unknown-subcommand", "no subcommand matched");
    } catch (const CliError& e) {
        json err;
        err["error"] = {{"kind", e.kind}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        log::error(e.what());
        return e.kind == "missing-file" || e.kind == "config-parse" ||
                       e.kind == "config-schema" || e.kind == "unknown-subcommand"
                   ? 2
                   : 1;
    } catch (const Error& e) {
        json err;
        err["error"] = {{"kind", "domain"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        log::error(e.what());
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"kind", "internal"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        log::error(e.what());
        return 1;
    }
}
