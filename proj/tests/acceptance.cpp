// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "frictionlab/analysis.hpp"
#include "frictionlab/coarse.hpp"
#include "frictionlab/dynamics.hpp"
#include "frictionlab/estimators.hpp"
#include "frictionlab/kernel.hpp"
#include "frictionlab/marl.hpp"
#include "frictionlab/rng.hpp"
#include "frictionlab/rom.hpp"
#include "frictionlab/svg.hpp"

using namespace frictionlab;

namespace {

int failures = 0;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    std::printf("[%s] criterion %2d: %-28s %7.2fs  %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

kernel::KernelTriple triple(double alpha, double sigma, double eps) {
    return kernel::KernelTriple(alpha, sigma, eps);
}

// ---------------------------------------------------------------------------
// 1. Desiderata suite on 1,000 random valid triples.
void criterion_1() {
    Timer timer;
    Rng rng(1001);
    bool pass = true;
    std::string detail = "D1-D7, D9, D10 on 1000 triples";
    const double h = 1e-6;
    for (int i = 0; i < 1000 && pass; ++i) {
        const double sigma = rng.uniform(0.01, 10.0);
        const double alpha = rng.uniform(-0.99, 0.99);
        const double eps = rng.uniform(h, 1.0 - h);
        const double f = kernel::friction(triple(alpha, sigma, eps));

        pass = pass && f >= 0.0;                                         // D1
        pass = pass && kernel::friction(triple(alpha, 0.0, eps)) == 0.0;  // D2
        pass = pass && kernel::friction(triple(alpha, sigma + h, eps)) -
                               kernel::friction(triple(alpha, sigma - h, eps)) >
                           0.0;  // D3
        pass = pass && kernel::friction(triple(alpha + h, sigma, eps)) -
                               kernel::friction(triple(alpha - h, sigma, eps)) <
                           0.0;  // D4
        pass = pass && kernel::friction(triple(alpha, sigma, eps + h)) -
                               kernel::friction(triple(alpha, sigma, eps - h)) >
                           0.0;  // D5
        pass = pass && std::isfinite(kernel::friction(triple(1.0, sigma, eps)));  // D7
        for (double lambda : {0.5, 2.0, 10.0}) {                                  // D9
            const double scaled = kernel::friction(triple(alpha, lambda * sigma, eps));
            pass = pass && std::fabs(scaled - lambda * f) <= 1e-12 * std::fabs(lambda * f);
        }
        pass = pass && kernel::friction(triple(1.0, sigma, 0.0)) == sigma / 2.0;  // D10
    }
    // D6 divergence near the pole
    const double near_pole = kernel::friction(triple(-1.0 + 1e-6, 1.0, 0.0));
    pass = pass && near_pole > 1e5;
    for (int k = 3; k <= 6; ++k) {
        pass = pass && kernel::friction(triple(-1.0 + std::pow(10.0, -k), 1.0, 0.0)) >
                           std::pow(10.0, k - 1);
    }
    const double t = timer.seconds();
    report(1, "desiderata suite", pass && t < 1.0, t, detail);
}

// 2. Inevitable friction on randomized domains.
void criterion_2() {
    Timer timer;
    Rng rng(1002);
    bool pass = true;
    for (int i = 0; i < 1000 && pass; ++i) {
        std::vector<kernel::Stakeholder> members;
        const int n = 1 + static_cast<int>(rng.below(8));
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            kernel::Stakeholder s;
            s.stake = rng.uniform(0.001, 5.0);
            s.alignment = rng.uniform(-0.99, 1.0);
            s.entropy = rng.uniform(0.0, 1.0);
            s.voice = rng.uniform01();
            total += s.stake;
            members.push_back(s);
        }
        const double f = kernel::friction_aggregate(kernel::DelegationDomain(members));
        pass = pass && f > 0.0 && f >= total / 2.0 - 1e-12;
    }
    const double t = timer.seconds();
    report(2, "inevitable friction", pass && t < 1.0, t, "1000 random domains, F >= sigma/2");
}

// 3. ROM probability conservation over long RK4 runs.
void criterion_3() {
    Timer timer;
    Rng rng(1003);
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20 && pass; ++trial) {
        std::vector<double> w(5), rho(5);
        rom::Matrix m(5, std::vector<double>(5));
        for (int i = 0; i < 5; ++i) {
            w[static_cast<std::size_t>(i)] = rng.uniform(0.2, 2.0);
            rho[static_cast<std::size_t>(i)] = rng.uniform(0.1, 1.0);
            double row = 0.0;
            for (int j = 0; j < 5; ++j) {
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    rng.uniform(0.01, 1.0);
                row += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < 5; ++j) {
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= row;
            }
        }
        const rom::RomSystem sys(w, rho, m);
        const auto trajectory = rom::rom_integrate(rom::Population::uniform(5), sys, 1e-3, 10000);
        for (const auto& point : trajectory) {
            double sum = 0.0;
            for (std::size_t i = 0; i < point.size(); ++i) sum += point[i];
            worst = std::max(worst, std::fabs(sum - 1.0));
        }
        pass = pass && worst < 1e-9;
    }
    const double t = timer.seconds();
    report(3, "rom conservation", pass && t < 10.0, t,
           "20 ergodic 5-type systems, 1e4 steps, worst |sum-1| = " + std::to_string(worst));
}

// 4. Stationary distribution correctness.
void criterion_4() {
    Timer timer;
    bool pass = true;
    std::string detail;

    // neutral doubly stochastic symmetric system -> uniform
    rom::RomSystem neutral({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0},
                           {{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}});
    const auto neutral_result = rom::stationary_distribution(neutral, 1e-10, 1000000);
    pass = pass && neutral_result.residual < 1e-8;
    for (int i = 0; i < 3; ++i) {
        pass = pass && std::fabs(neutral_result.distribution[i] - 1.0 / 3.0) < 1e-8;
    }

    // random 3-type systems vs a 1e6-iteration naive fixed-point oracle
    Rng rng(1004);
    double worst_tv = 0.0;
    for (int trial = 0; trial < 3 && pass; ++trial) {
        std::vector<double> w(3), rho(3);
        rom::Matrix m(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i) {
            w[static_cast<std::size_t>(i)] = rng.uniform(0.2, 2.0);
            rho[static_cast<std::size_t>(i)] = rng.uniform(0.1, 1.0);
            double row = 0.0;
            for (int j = 0; j < 3; ++j) {
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    rng.uniform(0.01, 1.0);
                row += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < 3; ++j) {
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /= row;
            }
        }
        const rom::RomSystem sys(w, rho, m);
        const auto result = rom::stationary_distribution(sys, 1e-10, 1000000);
        pass = pass && result.residual < 1e-8;

        std::vector<double> p = {1.0 / 3, 1.0 / 3, 1.0 / 3};
        for (int iter = 0; iter < 1000000; ++iter) {
            std::vector<double> q(3, 0.0);
            for (int to = 0; to < 3; ++to) {
                for (int from = 0; from < 3; ++from) {
                    q[static_cast<std::size_t>(to)] +=
                        p[static_cast<std::size_t>(from)] * w[static_cast<std::size_t>(from)] *
                        rho[static_cast<std::size_t>(from)] *
                        m[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
                }
            }
            const double total = q[0] + q[1] + q[2];
            for (auto& v : q) v /= total;
            p = q;
        }
        double tv = 0.0;
        for (int i = 0; i < 3; ++i) tv += 0.5 * std::fabs(p[static_cast<std::size_t>(i)] -
                                                          result.distribution[i]);
        worst_tv = std::max(worst_tv, tv);
        pass = pass && tv < 1e-6;
    }
    const double t = timer.seconds();
    report(4, "stationary correctness", pass && t < 10.0, t,
           "residual < 1e-8, uniform neutral, oracle TV = " + std::to_string(worst_tv));
}

// 5. Selection for consent.
void criterion_5() {
    Timer timer;
    const double rho0 = rom::consent_survival(1.0, 0.5);
    const double rho1 = rom::consent_survival(0.5, 2.0);
    const rom::RomSystem sys({1.0, 1.0}, {rho0, rho1}, {{0.99, 0.01}, {0.01, 0.99}});
    const auto result = rom::stationary_distribution(sys, 1e-10, 1000000);
    const bool pass = result.distribution[0] > result.distribution[1];
    const double t = timer.seconds();
    report(5, "selection for consent", pass && t < 1.0, t,
           "p*(L=1,F=0.5) = " + std::to_string(result.distribution[0]) + " > p*(L=0.5,F=2) = " +
               std::to_string(result.distribution[1]));
}

// 6. Ownership closed form and hazard monotonicity.
void criterion_6() {
    Timer timer;
    const rom::OwnershipParams params{1.0, 1.0, 1.0};
    const double dt = 1e-3;
    const long steps = 10000;  // t in [0, 10]
    const std::vector<bool> holding(static_cast<std::size_t>(steps), true);
    const auto trajectory = rom::ownership_integrate(0.2, params, holding, dt);
    double worst = 0.0;
    for (long i = 0; i <= steps; ++i) {
        const double time = dt * static_cast<double>(i);
        const double exact = 1.0 - (1.0 - 0.2) * std::exp(-params.beta * time);
        worst = std::max(worst,
                         std::fabs(trajectory[static_cast<std::size_t>(i)] - exact));
    }
    bool pass = worst < 1e-6;

    double prev = 2.0;
    for (int i = 0; i < 100; ++i) {
        const double h = rom::tenure_transition_hazard(0.1 * i, params);
        pass = pass && h < prev;
        prev = h;
    }
    const double t = timer.seconds();
    report(6, "ownership closed form", pass && t < 1.0, t,
           "max |O - closed form| = " + std::to_string(worst) + ", hazard strictly decreasing");
}

// 7. Lumpability commutation.
void criterion_7() {
    Timer timer;
    rom::Matrix lumpable = {
        {0.40, 0.30, 0.20, 0.10},
        {0.25, 0.45, 0.05, 0.25},
        {0.15, 0.25, 0.35, 0.25},
        {0.30, 0.10, 0.20, 0.40},
    };
    rom::Matrix perturbed = lumpable;
    perturbed[0][0] -= 0.05;
    perturbed[0][2] += 0.05;

    const rom::RomSystem good({1.2, 1.2, 0.8, 0.8}, {0.9, 0.9, 0.5, 0.5}, lumpable);
    const rom::RomSystem bad({1.2, 1.2, 0.8, 0.8}, {0.9, 0.9, 0.5, 0.5}, perturbed);
    const coarse::Partition part({0, 0, 1, 1});
    const rom::Population p0({0.1, 0.3, 0.2, 0.4});

    const double err_good = coarse::commutation_error(good, part, p0, 1e-3, 1000);
    const double err_bad = coarse::commutation_error(bad, part, p0, 1e-3, 1000);
    const bool pass = err_good < 1e-6 && err_bad > 1e-3;
    const double t = timer.seconds();
    report(7, "lumpability commutation", pass && t < 5.0, t,
           "lumpable err = " + std::to_string(err_good) + ", perturbed err = " +
               std::to_string(err_bad));
}

// 8. First-order error propagation vs Monte-Carlo.
void criterion_8() {
    Timer timer;
    Rng rng(1008);
    bool pass = true;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 10 && pass; ++trial) {
        const kernel::KernelTriple k(rng.uniform(-0.5, 0.95), rng.uniform(0.5, 5.0),
                                     rng.uniform(0.05, 0.95));
        const double base = kernel::friction(k);
        const double stddev = 1e-3;
        double abs_err_sum = 0.0, abs_actual_sum = 0.0;
        for (int s = 0; s < 100000; ++s) {
            const double es = rng.gauss(0.0, stddev);
            const double ea = rng.gauss(0.0, stddev);
            const double ee = rng.gauss(0.0, stddev);
            const double actual =
                k.sigma + es >= 0.0
                    ? (k.sigma + es) * (1.0 + k.epsilon + ee) / (1.0 + k.alpha + ea) - base
                    : -base;
            const double predicted = kernel::friction_error_propagation(k, es, ea, ee);
            abs_err_sum += std::fabs(predicted - actual);
            abs_actual_sum += std::fabs(actual);
        }
        const double ratio = abs_err_sum / abs_actual_sum;
        worst_ratio = std::max(worst_ratio, ratio);
        pass = pass && ratio < 0.05;
    }
    const double t = timer.seconds();
    report(8, "error propagation", pass && t < 10.0, t,
           "worst mean |pred - actual| / mean |actual| = " + std::to_string(worst_ratio));
}

// 9. Friction-aware allocation vs exhaustive oracle.
void criterion_9() {
    Timer timer;
    Rng rng(1009);
    bool pass = true;
    for (int trial = 0; trial < 50 && pass; ++trial) {
        const std::size_t n = 2 + rng.below(2);  // 2..3 agents
        const std::size_t m = 1 + rng.below(3);  // 1..3 resources
        kernel::SystemTable table;
        table.stakes.assign(n, std::vector<double>(m));
        table.alignments.assign(
            n, std::vector<std::vector<double>>(n, std::vector<double>(m)));
        table.entropies.assign(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < m; ++r) table.stakes[i][r] = rng.uniform(0.0, 3.0);
            for (std::size_t j = 0; j < n; ++j) {
                table.entropies[i][j] = rng.uniform01();
                for (std::size_t r = 0; r < m; ++r) {
                    table.alignments[i][j][r] = rng.uniform(-0.9, 1.0);
                }
            }
        }
        const auto result = kernel::friction_aware_allocation(table);

        // independent exhaustive oracle
        double best = 1e300;
        std::vector<std::size_t> best_assignment;
        std::vector<std::size_t> a(m, 0);
        long total = 1;
        for (std::size_t r = 0; r < m; ++r) total *= static_cast<long>(n);
        for (long code = 0; code < total; ++code) {
            long rest = code;
            for (std::size_t r = m; r-- > 0;) {
                a[r] = static_cast<std::size_t>(rest) % n;
                rest /= static_cast<long>(n);
            }
            double objective = 0.0;
            for (std::size_t r = 0; r < m; ++r) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != a[r]) {
                        objective += table.stakes[j][r] * (1.0 + table.entropies[a[r]][j]) /
                                     (1.0 + table.alignments[a[r]][j][r]);
                    }
                }
            }
            if (objective < best) {
                best = objective;
                best_assignment = a;
            }
        }
        pass = pass && std::fabs(result.objective - best) < 1e-12 &&
               result.assignment == best_assignment;
    }
    const double t = timer.seconds();
    report(9, "friction-aware allocation", pass && t < 5.0, t,
           "50 random instances, exhaustive-oracle equality");
}

// 10 + 11. Desk-scale factorial replication and determinism.
void criteria_10_11() {
    Timer timer;
    marl::ExperimentDesign design;
    design.alpha_levels = {-0.4, 0.0, 0.8};
    design.sigma_levels = {0.2, 0.6, 1.0};
    design.epsilon_levels = {0.0, 0.5, 1.0};
    design.replications = 5;
    design.master_seed = 20240817;

    marl::EnvConfig env = marl::EnvConfig::defaults(2, 2);
    marl::AgentConfig agent;
    agent.approximator = marl::Approximator::tabular;
    agent.tabular_bins = 7;
    agent.learn_rate = 0.1;
    agent.discount = 0.99;
    agent.explore_start = 0.1;
    agent.explore_end = 0.01;
    agent.episodes = 1000;

    const auto records = marl::run_experiment(design, env, agent, 4);
    const auto reports = analysis::test_hypotheses(records, "reward_gap", 1000, 4242);

    bool pass = true;
    std::string detail;
    const char* expected_sign[] = {"-", "+", "+"};
    for (int i = 0; i < 3; ++i) {
        const auto& h = reports[static_cast<std::size_t>(i)];
        const bool sign_ok = (i == 0) ? h.statistic < 0.0 : h.statistic > 0.0;
        pass = pass && sign_ok && h.p_value < 0.05;
        detail += h.id + " rho=" + std::to_string(h.statistic).substr(0, 6) + " (want " +
                  expected_sign[i] + ") p=" + std::to_string(h.p_value).substr(0, 6) + "; ";
    }
    const auto& h4 = reports[3];
    pass = pass && h4.statistic > 0.0 && h4.p_value < 0.05;
    detail += "H4 beta1=" + std::to_string(h4.statistic).substr(0, 6) +
              " p=" + std::to_string(h4.p_value).substr(0, 6) +
              " R2=" + std::to_string(h4.r_squared).substr(0, 5);

    // reported, not required: M1 vs M4 BIC ranking
    const auto models = analysis::compare_models(records, "reward_gap");
    double bic_m1 = 0.0, bic_m4 = 0.0;
    for (const auto& m : models) {
        if (analysis::model_name(m.model) == "M1") bic_m1 = m.fit.bic;
        if (analysis::model_name(m.model) == "M4") bic_m4 = m.fit.bic;
    }
    detail += std::string("; M1 ") + (bic_m1 < bic_m4 ? "beats" : "trails") + " M4 on BIC";

    const double t10 = timer.seconds();
    report(10, "desk-scale replication", pass && t10 < 900.0, t10, detail);

    // criterion 11: byte-identical CSV and SVG across worker counts
    Timer timer11;
    const std::string csv_a = marl::records_to_csv(records);
    const auto rerun = marl::run_experiment(design, env, agent, 1);
    const std::string csv_b = marl::records_to_csv(rerun);

    const auto heatmap_of = [&](const std::vector<marl::MetricsRecord>& rs) {
        svg::HeatmapData data;
        data.title = "reward_gap by alpha x sigma";
        data.x_label = "alpha";
        data.y_label = "sigma";
        for (double a : design.alpha_levels) data.x_ticks.push_back(std::to_string(a));
        for (double s : design.sigma_levels) data.y_ticks.push_back(std::to_string(s));
        data.cells.assign(design.sigma_levels.size(),
                          std::vector<double>(design.alpha_levels.size(), 0.0));
        std::vector<std::vector<int>> counts(
            design.sigma_levels.size(), std::vector<int>(design.alpha_levels.size(), 0));
        for (const auto& r : rs) {
            data.cells[static_cast<std::size_t>(r.sigma_index)]
                      [static_cast<std::size_t>(r.alpha_index)] += r.reward_gap;
            counts[static_cast<std::size_t>(r.sigma_index)]
                  [static_cast<std::size_t>(r.alpha_index)] += 1;
        }
        for (std::size_t y = 0; y < data.cells.size(); ++y) {
            for (std::size_t x = 0; x < data.cells[y].size(); ++x) {
                data.cells[y][x] /= counts[y][x];
            }
        }
        return svg::render_heatmap(data);
    };
    const bool pass11 = csv_a == csv_b && heatmap_of(records) == heatmap_of(rerun);
    const double t11 = timer11.seconds();
    report(11, "determinism", pass11 && t11 < 900.0, t11,
           csv_a == csv_b ? "CSV and SVG byte-identical across worker counts"
                          : "CSV mismatch between worker counts");
}

// 12. Estimator spot checks.
void criterion_12() {
    Timer timer;
    bool pass = true;

    // noiseless binary channel -> 0; independent pair -> 1 (both exact)
    const double noiseless =
        estimators::entropy_channel(estimators::DiscreteJoint({{0.5, 0.0}, {0.0, 0.5}}));
    const double independent =
        estimators::entropy_channel(estimators::DiscreteJoint({{0.25, 0.25}, {0.25, 0.25}}));
    pass = pass && noiseless == 0.0 && independent == 1.0;

    // KL(p || p) = 0
    pass = pass && estimators::entropy_kl({0.3, 0.7}, {0.3, 0.7}) == 0.0;

    // volatility proxy of a series whose event window is its baseline scaled 5.7x
    std::vector<double> timestamps, returns;
    const std::vector<double> base = {0.012, -0.018, 0.007, -0.011, 0.021, -0.004, 0.009, -0.016};
    for (std::size_t i = 0; i < base.size(); ++i) {
        timestamps.push_back(static_cast<double>(i));
        returns.push_back(base[i]);
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
        timestamps.push_back(static_cast<double>(base.size() + i));
        returns.push_back(5.7 * base[i]);
    }
    const estimators::ReturnSeries series(timestamps, returns);
    const double ratio =
        estimators::proxy_volatility(series, 0, base.size(), base.size(), 2 * base.size());
    pass = pass && std::fabs(ratio - 5.7) < 1e-9;

    const double t = timer.seconds();
    report(12, "estimator spot checks", pass && t < 1.0, t,
           "channel 0/1 exact, KL(p||p) = 0, volatility ratio = " + std::to_string(ratio));
}

}  // namespace

int main() {
    std::printf("friction_lab acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criteria_10_11();
    criterion_12();
    if (failures > 0) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
