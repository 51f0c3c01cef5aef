#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frictionlab/rng.hpp"

namespace frictionlab::marl {

// Shared resource-allocation environment: m resource levels in [0, C_j],
// joint requests move each level by step_size * mean request, clamped.
struct EnvConfig {
    int n_agents = 2;
    int m_resources = 2;
    std::vector<double> capacity;       // defaults to 2.0 per resource
    double step_size = 0.1;             // Delta
    int episode_length = 100;           // T
    std::vector<double> initial_state;  // defaults to zeros

    // 2.0 capacity per resource, zero initial state.
    static EnvConfig defaults(int agents, int resources);

    void validate() const;
    double capacity_of(int resource) const { return capacity[static_cast<std::size_t>(resource)]; }
};

// Reward parameters: R_i(s) = sum_j weights[i][j] * -(s_j - targets[i][j])^2.
struct RewardParams {
    std::vector<std::vector<double>> weights;  // [agent][resource], in [0, 1]
    std::vector<std::vector<double>> targets;  // [agent][resource]

    void validate(const EnvConfig& cfg) const;
    double reward(int agent, const std::vector<double>& state) const;
};

enum class Approximator { tabular, mlp };

struct AgentConfig {
    Approximator approximator = Approximator::mlp;
    int tabular_bins = 7;  // observation bins per resource dimension
    int mlp_hidden = 64;
    int mlp_layers = 2;
    double learn_rate = 0.001;
    double discount = 0.99;
    double explore_start = 0.1;
    double explore_end = 0.01;
    int episodes = 10000;
    int probe_points = 5;  // probe-state grid resolution per dimension

    void validate() const;
};

struct ExperimentDesign {
    std::vector<double> alpha_levels = {-0.8, -0.4, 0.0, 0.4, 0.8};
    std::vector<double> sigma_levels = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> epsilon_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    int replications = 30;
    std::uint64_t master_seed = 0;

    void validate() const;
    std::size_t condition_count() const {
        return alpha_levels.size() * sigma_levels.size() * epsilon_levels.size();
    }
};

// Episode count until policy stabilization, or empty for "never".
using ConvergenceTime = std::optional<int>;

struct MetricsRecord {
    int alpha_index = 0;
    int sigma_index = 0;
    int epsilon_index = 0;
    int replication = 0;
    double alpha = 0.0;
    double sigma = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double reward_gap = 0.0;
    ConvergenceTime convergence_time;
    double policy_variance = 0.0;
    double pareto_inefficiency = 0.0;
    double measured_alignment = 0.0;
    double theoretical_friction = 0.0;
    std::string status = "ok";
};

// Greedy per-resource actions (-1/0/+1) flattened over
// (agent, probe state, resource).
using PolicySnapshot = std::vector<double>;

// Trained greedy policy: observation -> joint-resource action index.
class Policy {
  public:
    virtual ~Policy() = default;
    virtual int action(const std::vector<double>& obs) const = 0;
};

struct TrainResult {
    std::vector<std::shared_ptr<const Policy>> policies;
    std::vector<double> reward_trace;                      // per-episode mean over steps+agents
    std::vector<std::vector<double>> agent_reward_traces;  // [agent][episode]
    std::vector<PolicySnapshot> policy_trace;              // per-episode greedy snapshots
};

// One environment transition. joint_action[agent][resource] in {-1, 0, +1}.
std::pair<std::vector<double>, std::vector<double>> env_step(
    const std::vector<double>& state, const std::vector<std::vector<int>>& joint_action,
    const EnvConfig& cfg, const RewardParams& rewards);

// Draws reward parameters for a factorial condition: targets via the
// common-factor construction with pairwise correlation alpha_level, weights
// uniform at sigma_level.
RewardParams make_rewards(double alpha_level, double sigma_level, const EnvConfig& cfg, Rng& rng);

// state + N(0, epsilon_level * I) per dimension.
std::vector<double> observe(const std::vector<double>& state, double epsilon_level, Rng& rng);

// Independent Q-learning with epsilon-greedy exploration annealed linearly
// from explore_start to explore_end over the episode budget.
TrainResult train_agents(const EnvConfig& env, const RewardParams& rewards,
                         const AgentConfig& agents, int episodes, double epsilon_level, Rng& rng);

// Noise-free greedy rollout of trained policies from the initial state.
// Returns (per-step mean-agent reward, final state).
std::pair<double, std::vector<double>> greedy_rollout(
    const EnvConfig& env, const RewardParams& rewards,
    const std::vector<std::shared_ptr<const Policy>>& policies, int steps);

// Best steady-state mean-agent reward minus the realized per-step mean.
double reward_gap(const std::vector<double>& reward_trace, const RewardParams& rewards,
                  const EnvConfig& cfg);

// The optimum state behind reward_gap: capacity-clamped weighted target mean.
std::vector<double> cooperative_optimum(const RewardParams& rewards, const EnvConfig& cfg);

// First episode whose policy snapshot is within delta (max-norm) of the
// previous one; empty when no such episode exists.
ConvergenceTime convergence_time(const std::vector<PolicySnapshot>& policy_trace, double delta);

// (1/k) sum_r ||pi_r - pi_bar||^2 over the probe-grid encoding.
double policy_variance(const std::vector<PolicySnapshot>& policies);

// Distance from the realized per-agent reward vector to a sampled Pareto
// frontier of scalarized steady-state optima.
double pareto_inefficiency(const std::vector<double>& realized_rewards,
                           const RewardParams& rewards, const EnvConfig& cfg,
                           int frontier_samples = 101);

// Sample Pearson correlation of agent rewards over uniform states; mean
// pairwise value for n > 2.
double measured_alignment(const RewardParams& rewards, const EnvConfig& cfg, int samples,
                          Rng& rng);

// Full factorial sweep; one record per (condition, replication), ordered by
// (alpha, sigma, epsilon, replication) regardless of worker count.
std::vector<MetricsRecord> run_experiment(const ExperimentDesign& design, const EnvConfig& env,
                                          const AgentConfig& agents, int workers = 1);

// Fixed CSV schema for MetricsRecords (documented in the README).
std::string records_to_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> records_from_csv(const std::string& text);

}  // namespace frictionlab::marl
