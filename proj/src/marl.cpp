#include "frictionlab/marl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include "frictionlab/csv.hpp"
#include "frictionlab/errors.hpp"
#include "frictionlab/kernel.hpp"

namespace frictionlab::marl {

namespace {

int pow_int(int base, int exp) {
    int result = 1;
    for (int i = 0; i < exp; ++i) result *= base;
    return result;
}

// Action index <-> per-resource requests in {-1, 0, +1}.
std::vector<int> decode_action(int index, int m) {
    std::vector<int> requests(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        requests[static_cast<std::size_t>(j)] = index % 3 - 1;
        index /= 3;
    }
    return requests;
}

}  // namespace

EnvConfig EnvConfig::defaults(int agents, int resources) {
    EnvConfig cfg;
    cfg.n_agents = agents;
    cfg.m_resources = resources;
    cfg.capacity.assign(static_cast<std::size_t>(resources), 2.0);
    cfg.initial_state.assign(static_cast<std::size_t>(resources), 0.0);
    return cfg;
}

void EnvConfig::validate() const {
    if (n_agents < 1) throw ParameterError("environment needs at least 1 agent");
    if (m_resources < 1) throw ParameterError("environment needs at least 1 resource");
    if (capacity.size() != static_cast<std::size_t>(m_resources)) {
        throw DimensionError("capacity vector must have one entry per resource");
    }
    for (double c : capacity) {
        if (!(c > 0.0)) throw ParameterError("capacities must be > 0");
    }
    if (!(step_size > 0.0)) throw ParameterError("step size must be > 0");
    if (episode_length < 1) throw ParameterError("episode length must be >= 1");
    if (initial_state.size() != static_cast<std::size_t>(m_resources)) {
        throw DimensionError("initial state must have one entry per resource");
    }
    for (int j = 0; j < m_resources; ++j) {
        const double s = initial_state[static_cast<std::size_t>(j)];
        if (s < 0.0 || s > capacity_of(j)) {
            throw ParameterError("initial state outside the capacity box");
        }
    }
}

void RewardParams::validate(const EnvConfig& cfg) const {
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    const auto m = static_cast<std::size_t>(cfg.m_resources);
    if (weights.size() != n || targets.size() != n) {
        throw DimensionError("reward parameters must cover every agent");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i].size() != m || targets[i].size() != m) {
            throw DimensionError("reward parameters must cover every resource");
        }
        for (double w : weights[i]) {
            if (w < 0.0 || w > 1.0) throw ParameterError("reward weights must be in [0, 1]");
        }
    }
}

double RewardParams::reward(int agent, const std::vector<double>& state) const {
    const auto& w = weights[static_cast<std::size_t>(agent)];
    const auto& tau = targets[static_cast<std::size_t>(agent)];
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double miss = state[j] - tau[j];
        total += w[j] * -(miss * miss);
    }
    return total;
}

void AgentConfig::validate() const {
    if (!(discount > 0.0) || !(discount < 1.0)) throw ParameterError("discount outside (0, 1)");
    if (explore_end > explore_start) throw ParameterError("explore_end must be <= explore_start");
    if (explore_start < 0.0 || explore_start > 1.0) {
        throw ParameterError("exploration rates must be in [0, 1]");
    }
    if (learn_rate < 0.0) throw ParameterError("learn rate must be >= 0");
    if (episodes < 1) throw ParameterError("episodes must be >= 1");
    if (approximator == Approximator::tabular && tabular_bins < 1) {
        throw ParameterError("tabular agents need at least 1 bin");
    }
    if (approximator == Approximator::mlp && (mlp_hidden < 1 || mlp_layers < 1)) {
        throw ParameterError("mlp agents need positive width and depth");
    }
    if (probe_points < 2) throw ParameterError("probe grid needs at least 2 points");
}

void ExperimentDesign::validate() const {
    if (alpha_levels.empty() || sigma_levels.empty() || epsilon_levels.empty()) {
        throw ParameterError("factor grids must be non-empty");
    }
    for (double a : alpha_levels) {
        if (a < -1.0 || a > 1.0) throw ParameterError("alpha level outside [-1, 1]");
    }
    for (double s : sigma_levels) {
        if (s < 0.0 || s > 1.0) throw ParameterError("sigma level outside [0, 1]");
    }
    for (double e : epsilon_levels) {
        if (e < 0.0 || e > 1.0) throw ParameterError("epsilon level outside [0, 1]");
    }
    if (replications < 1) throw ParameterError("replications must be >= 1");
}

std::pair<std::vector<double>, std::vector<double>> env_step(
    const std::vector<double>& state, const std::vector<std::vector<int>>& joint_action,
    const EnvConfig& cfg, const RewardParams& rewards) {
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    const auto m = static_cast<std::size_t>(cfg.m_resources);
    if (state.size() != m) throw DimensionError("state size mismatch");
    if (joint_action.size() != n) throw DimensionError("joint action must cover every agent");
    for (const auto& action : joint_action) {
        if (action.size() != m) throw DimensionError("agent action must cover every resource");
        for (int a : action) {
            if (a < -1 || a > 1) throw ParameterError("requests must be in {-1, 0, +1}");
        }
    }

    std::vector<double> next(m);
    for (std::size_t j = 0; j < m; ++j) {
        double mean_request = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_request += joint_action[i][j];
        mean_request /= static_cast<double>(n);
        next[j] = std::clamp(state[j] + cfg.step_size * mean_request, 0.0,
                             cfg.capacity[j]);
    }

    std::vector<double> agent_rewards(n);
    for (std::size_t i = 0; i < n; ++i) {
        agent_rewards[i] = rewards.reward(static_cast<int>(i), next);
    }
    return {std::move(next), std::move(agent_rewards)};
}

RewardParams make_rewards(double alpha_level, double sigma_level, const EnvConfig& cfg,
                          Rng& rng) {
    if (alpha_level < -1.0 || alpha_level > 1.0) {
        throw ParameterError("alpha level outside [-1, 1]");
    }
    if (sigma_level < 0.0 || sigma_level > 1.0) {
        throw ParameterError("sigma level outside [0, 1]");
    }
    const int n = cfg.n_agents;
    const int m = cfg.m_resources;
    if (alpha_level < 0.0 && n > 2) {
        // equicorrelation below -1/(n-1) is infeasible
        if (alpha_level < -1.0 / static_cast<double>(n - 1) + 1e-12) {
            throw ParameterError("negative alpha level infeasible for " + std::to_string(n) +
                                 " agents");
        }
    }

    RewardParams params;
    params.weights.assign(static_cast<std::size_t>(n),
                          std::vector<double>(static_cast<std::size_t>(m), sigma_level));
    params.targets.assign(static_cast<std::size_t>(n),
                          std::vector<double>(static_cast<std::size_t>(m), 0.0));

    // Correlated standard factors t_ij, then an affine map into the capacity
    // box: targets sit at capacity/2 +- capacity/4 per unit factor.
    std::vector<std::vector<double>> t(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(m)));
    if (alpha_level >= 0.0 || n == 2) {
        const double a = std::fabs(alpha_level);
        const double common = std::sqrt(a);
        const double idio = std::sqrt(1.0 - a);
        for (int j = 0; j < m; ++j) {
            const double z = rng.gauss();
            for (int i = 0; i < n; ++i) {
                const double sign = (alpha_level < 0.0 && i % 2 == 1) ? -1.0 : 1.0;
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    sign * common * z + idio * rng.gauss();
            }
        }
    } else {
        // centered construction for mild negative equicorrelation, n > 2
        const double rho = alpha_level;
        const double u = static_cast<double>(n) * (-rho) / (1.0 - rho);
        const double lambda = 1.0 - std::sqrt(std::max(0.0, 1.0 - u));
        for (int j = 0; j < m; ++j) {
            std::vector<double> zeta(static_cast<std::size_t>(n));
            double mean = 0.0;
            for (int i = 0; i < n; ++i) {
                zeta[static_cast<std::size_t>(i)] = rng.gauss();
                mean += zeta[static_cast<std::size_t>(i)];
            }
            mean /= static_cast<double>(n);
            const double var = 1.0 - (2.0 * lambda - lambda * lambda) / static_cast<double>(n);
            const double scale = 1.0 / std::sqrt(var);
            for (int i = 0; i < n; ++i) {
                t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    scale * (zeta[static_cast<std::size_t>(i)] - lambda * mean);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double c = cfg.capacity[static_cast<std::size_t>(j)];
            params.targets[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                0.5 * c + 0.25 * c * t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    return params;
}

std::vector<double> observe(const std::vector<double>& state, double epsilon_level, Rng& rng) {
    if (epsilon_level < 0.0 || epsilon_level > 1.0) {
        throw ParameterError("epsilon level outside [0, 1]");
    }
    if (epsilon_level == 0.0) return state;
    std::vector<double> obs(state.size());
    const double stddev = std::sqrt(epsilon_level);
    for (std::size_t j = 0; j < state.size(); ++j) obs[j] = state[j] + rng.gauss(0.0, stddev);
    return obs;
}

namespace {

// Common interface for the action-value approximators.
class QAgent : public Policy {
  public:
    virtual double max_q(const std::vector<double>& obs) const = 0;
    virtual int greedy_action(const std::vector<double>& obs) const = 0;
    virtual void update(const std::vector<double>& obs, int action, double target) = 0;
    int action(const std::vector<double>& obs) const final { return greedy_action(obs); }
};

class TabularQ final : public QAgent {
  public:
    TabularQ(const EnvConfig& env, const AgentConfig& cfg)
        : bins_(cfg.tabular_bins),
          actions_(pow_int(3, env.m_resources)),
          capacity_(env.capacity),
          learn_rate_(cfg.learn_rate) {
        int states = 1;
        for (int j = 0; j < env.m_resources; ++j) states *= bins_;
        table_.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions_), 0.0);
    }

    int state_index(const std::vector<double>& obs) const {
        int index = 0;
        for (std::size_t j = 0; j < obs.size(); ++j) {
            const double frac = obs[j] / capacity_[j];
            int bin = static_cast<int>(std::floor(frac * bins_));
            bin = std::clamp(bin, 0, bins_ - 1);
            index = index * bins_ + bin;
        }
        return index;
    }

    double max_q(const std::vector<double>& obs) const override {
        const double* row = &table_[static_cast<std::size_t>(state_index(obs)) *
                                    static_cast<std::size_t>(actions_)];
        return *std::max_element(row, row + actions_);
    }

    int greedy_action(const std::vector<double>& obs) const override {
        const double* row = &table_[static_cast<std::size_t>(state_index(obs)) *
                                    static_cast<std::size_t>(actions_)];
        int best = 0;
        for (int a = 1; a < actions_; ++a) {
            if (row[a] > row[best]) best = a;
        }
        return best;
    }

    void update(const std::vector<double>& obs, int action, double target) override {
        double& q = table_[static_cast<std::size_t>(state_index(obs)) *
                               static_cast<std::size_t>(actions_) +
                           static_cast<std::size_t>(action)];
        q += learn_rate_ * (target - q);
    }

  private:
    int bins_;
    int actions_;
    std::vector<double> capacity_;
    double learn_rate_;
    std::vector<double> table_;
};

// Fully-connected Q network with rectified-linear hidden layers and
// adaptive-moment gradient descent, one step per transition.
class MlpQ final : public QAgent {
  public:
    MlpQ(const EnvConfig& env, const AgentConfig& cfg, Rng& rng)
        : learn_rate_(cfg.learn_rate), actions_(pow_int(3, env.m_resources)) {
        std::vector<int> sizes;
        sizes.push_back(env.m_resources);
        for (int l = 0; l < cfg.mlp_layers; ++l) sizes.push_back(cfg.mlp_hidden);
        sizes.push_back(actions_);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            layers_.push_back(Layer(sizes[l], sizes[l + 1], rng));
        }
    }

    double max_q(const std::vector<double>& obs) const override {
        const std::vector<double> q = forward(obs);
        return *std::max_element(q.begin(), q.end());
    }

    int greedy_action(const std::vector<double>& obs) const override {
        const std::vector<double> q = forward(obs);
        int best = 0;
        for (int a = 1; a < actions_; ++a) {
            if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
        }
        return best;
    }

    void update(const std::vector<double>& obs, int action, double target) override {
        // forward with cached activations
        std::vector<std::vector<double>> acts;
        acts.push_back(obs);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            acts.push_back(layers_[l].forward(acts.back(), l + 1 < layers_.size()));
        }
        const double q = acts.back()[static_cast<std::size_t>(action)];
        const double delta = q - target;  // d(loss)/dq for loss = (q - target)^2 / 2

        // backward: only the chosen output unit carries gradient
        std::vector<double> grad(acts.back().size(), 0.0);
        grad[static_cast<std::size_t>(action)] = delta;
        ++step_;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            grad = layers_[l].backward(acts[l], acts[l + 1], grad, l + 1 < layers_.size(),
                                       learn_rate_, step_);
        }
    }

  private:
    struct Layer {
        int in, out;
        std::vector<double> w, b;        // row-major (out x in)
        std::vector<double> mw, vw, mb, vb;  // adaptive-moment state

        Layer(int in_size, int out_size, Rng& rng) : in(in_size), out(out_size) {
            w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
            const double limit = std::sqrt(6.0 / in);
            for (double& x : w) x = rng.uniform(-limit, limit);
            b.assign(static_cast<std::size_t>(out), 0.0);
            mw.assign(w.size(), 0.0);
            vw.assign(w.size(), 0.0);
            mb.assign(b.size(), 0.0);
            vb.assign(b.size(), 0.0);
        }

        std::vector<double> forward(const std::vector<double>& x, bool relu) const {
            std::vector<double> y(static_cast<std::size_t>(out));
            for (int o = 0; o < out; ++o) {
                double sum = b[static_cast<std::size_t>(o)];
                const double* row = &w[static_cast<std::size_t>(o) * static_cast<std::size_t>(in)];
                for (int i = 0; i < in; ++i) sum += row[i] * x[static_cast<std::size_t>(i)];
                y[static_cast<std::size_t>(o)] = relu ? std::max(0.0, sum) : sum;
            }
            return y;
        }

        // Returns the gradient with respect to the layer input; applies one
        // adaptive-moment step to the parameters.
        std::vector<double> backward(const std::vector<double>& x, const std::vector<double>& y,
                                     std::vector<double> grad_out, bool relu, double lr,
                                     long step) {
            if (relu) {
                for (int o = 0; o < out; ++o) {
                    if (y[static_cast<std::size_t>(o)] <= 0.0) {
                        grad_out[static_cast<std::size_t>(o)] = 0.0;
                    }
                }
            }
            std::vector<double> grad_in(static_cast<std::size_t>(in), 0.0);
            constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
            const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (int o = 0; o < out; ++o) {
                const double g_o = grad_out[static_cast<std::size_t>(o)];
                const std::size_t row = static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
                if (g_o != 0.0) {
                    for (int i = 0; i < in; ++i) {
                        grad_in[static_cast<std::size_t>(i)] += w[row + i] * g_o;
                        const double g = g_o * x[static_cast<std::size_t>(i)];
                        mw[row + i] = beta1 * mw[row + i] + (1 - beta1) * g;
                        vw[row + i] = beta2 * vw[row + i] + (1 - beta2) * g * g;
                        w[row + i] -= lr * (mw[row + i] / corr1) /
                                      (std::sqrt(vw[row + i] / corr2) + eps);
                    }
                    const std::size_t ob = static_cast<std::size_t>(o);
                    mb[ob] = beta1 * mb[ob] + (1 - beta1) * g_o;
                    vb[ob] = beta2 * vb[ob] + (1 - beta2) * g_o * g_o;
                    b[ob] -= lr * (mb[ob] / corr1) / (std::sqrt(vb[ob] / corr2) + eps);
                }
            }
            return grad_in;
        }
    };

    std::vector<double> forward(const std::vector<double>& obs) const {
        std::vector<double> x = obs;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            x = layers_[l].forward(x, l + 1 < layers_.size());
        }
        return x;
    }

    double learn_rate_;
    int actions_;
    std::vector<Layer> layers_;
    long step_ = 0;
};

std::shared_ptr<QAgent> make_agent(const EnvConfig& env, const AgentConfig& cfg, Rng& rng) {
    if (cfg.approximator == Approximator::tabular) {
        return std::make_shared<TabularQ>(env, cfg);
    }
    return std::make_shared<MlpQ>(env, cfg, rng);
}

// Probe states: a uniform grid over the capacity box.
std::vector<std::vector<double>> probe_grid(const EnvConfig& env, int points) {
    const int m = env.m_resources;
    const int total = pow_int(points, m);
    std::vector<std::vector<double>> grid;
    grid.reserve(static_cast<std::size_t>(total));
    for (int index = 0; index < total; ++index) {
        std::vector<double> state(static_cast<std::size_t>(m));
        int rest = index;
        for (int j = 0; j < m; ++j) {
            const int tick = rest % points;
            rest /= points;
            state[static_cast<std::size_t>(j)] =
                env.capacity[static_cast<std::size_t>(j)] * tick / (points - 1);
        }
        grid.push_back(std::move(state));
    }
    return grid;
}

PolicySnapshot snapshot_policies(const std::vector<std::shared_ptr<QAgent>>& agents,
                                 const std::vector<std::vector<double>>& grid, int m) {
    PolicySnapshot snap;
    snap.reserve(agents.size() * grid.size() * static_cast<std::size_t>(m));
    for (const auto& agent : agents) {
        for (const auto& state : grid) {
            const std::vector<int> requests = decode_action(agent->greedy_action(state), m);
            for (int r : requests) snap.push_back(static_cast<double>(r));
        }
    }
    return snap;
}

}  // namespace

TrainResult train_agents(const EnvConfig& env, const RewardParams& rewards,
                         const AgentConfig& agents_cfg, int episodes, double epsilon_level,
                         Rng& rng) {
    env.validate();
    agents_cfg.validate();
    rewards.validate(env);
    if (episodes < 1) throw ParameterError("episodes must be >= 1");

    const auto n = static_cast<std::size_t>(env.n_agents);
    const int m = env.m_resources;
    const int n_actions = pow_int(3, m);

    std::vector<std::shared_ptr<QAgent>> agents;
    agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i) agents.push_back(make_agent(env, agents_cfg, rng));

    const auto grid = probe_grid(env, agents_cfg.probe_points);

    TrainResult result;
    result.reward_trace.reserve(static_cast<std::size_t>(episodes));
    result.agent_reward_traces.assign(n, {});
    result.policy_trace.reserve(static_cast<std::size_t>(episodes));

    for (int episode = 0; episode < episodes; ++episode) {
        const double anneal =
            episodes > 1 ? static_cast<double>(episode) / static_cast<double>(episodes - 1) : 0.0;
        const double explore =
            agents_cfg.explore_start + (agents_cfg.explore_end - agents_cfg.explore_start) * anneal;

        std::vector<double> state = env.initial_state;
        std::vector<std::vector<double>> obs(n);
        for (std::size_t i = 0; i < n; ++i) obs[i] = observe(state, epsilon_level, rng);

        std::vector<double> episode_reward(n, 0.0);
        std::vector<int> actions(n);
        std::vector<std::vector<int>> joint(n);
        for (int step = 0; step < env.episode_length; ++step) {
            for (std::size_t i = 0; i < n; ++i) {
                if (rng.uniform01() < explore) {
                    actions[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_actions)));
                } else {
                    actions[i] = agents[i]->greedy_action(obs[i]);
                }
                joint[i] = decode_action(actions[i], m);
            }
            auto [next_state, step_rewards] = env_step(state, joint, env, rewards);
            const bool terminal = step + 1 == env.episode_length;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(step_rewards[i])) {
                    throw NumericError("non-finite reward during training", episode);
                }
                std::vector<double> next_obs = observe(next_state, epsilon_level, rng);
                const double target =
                    terminal ? step_rewards[i]
                             : step_rewards[i] + agents_cfg.discount * agents[i]->max_q(next_obs);
                if (!std::isfinite(target)) {
                    throw NumericError("non-finite action-value target", episode);
                }
                agents[i]->update(obs[i], actions[i], target);
                episode_reward[i] += step_rewards[i];
                obs[i] = std::move(next_obs);
            }
            state = std::move(next_state);
        }

        double mean_reward = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double per_step = episode_reward[i] / env.episode_length;
            result.agent_reward_traces[i].push_back(per_step);
            mean_reward += per_step;
        }
        result.reward_trace.push_back(mean_reward / static_cast<double>(n));
        result.policy_trace.push_back(snapshot_policies(agents, grid, m));
    }
    result.policies.assign(agents.begin(), agents.end());
    return result;
}

std::pair<double, std::vector<double>> greedy_rollout(
    const EnvConfig& env, const RewardParams& rewards,
    const std::vector<std::shared_ptr<const Policy>>& policies, int steps) {
    env.validate();
    rewards.validate(env);
    if (policies.size() != static_cast<std::size_t>(env.n_agents)) {
        throw DimensionError("one policy per agent required");
    }
    if (steps < 1) throw ParameterError("steps must be >= 1");

    const int m = env.m_resources;
    std::vector<double> state = env.initial_state;
    std::vector<std::vector<int>> joint(policies.size());
    double total = 0.0;
    for (int step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < policies.size(); ++i) {
            joint[i] = decode_action(policies[i]->action(state), m);
        }
        auto [next_state, step_rewards] = env_step(state, joint, env, rewards);
        for (double r : step_rewards) total += r / static_cast<double>(policies.size());
        state = std::move(next_state);
    }
    return {total / steps, state};
}

std::vector<double> cooperative_optimum(const RewardParams& rewards, const EnvConfig& cfg) {
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    const auto m = static_cast<std::size_t>(cfg.m_resources);
    std::vector<double> optimum(m);
    for (std::size_t j = 0; j < m; ++j) {
        double weight_sum = 0.0, weighted_target = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weight_sum += rewards.weights[i][j];
            weighted_target += rewards.weights[i][j] * rewards.targets[i][j];
        }
        if (weight_sum > 0.0) {
            optimum[j] = std::clamp(weighted_target / weight_sum, 0.0, cfg.capacity[j]);
        } else {
            optimum[j] = 0.5 * cfg.capacity[j];  // degenerate column: capacity midpoint
        }
    }
    return optimum;
}

double reward_gap(const std::vector<double>& reward_trace, const RewardParams& rewards,
                  const EnvConfig& cfg) {
    if (reward_trace.empty()) throw DegenerateInputError("empty reward trace");
    const std::vector<double> optimum = cooperative_optimum(rewards, cfg);
    double best = 0.0;
    for (int i = 0; i < cfg.n_agents; ++i) best += rewards.reward(i, optimum);
    best /= cfg.n_agents;

    double realized = 0.0;
    for (double r : reward_trace) realized += r;
    realized /= static_cast<double>(reward_trace.size());
    return best - realized;
}

ConvergenceTime convergence_time(const std::vector<PolicySnapshot>& policy_trace, double delta) {
    if (policy_trace.size() < 2) throw DegenerateInputError("policy trace needs >= 2 entries");
    for (std::size_t e = 1; e < policy_trace.size(); ++e) {
        if (policy_trace[e].size() != policy_trace[e - 1].size()) {
            throw DimensionError("policy snapshots differ in encoding size");
        }
        double dist = 0.0;
        for (std::size_t i = 0; i < policy_trace[e].size(); ++i) {
            dist = std::max(dist, std::fabs(policy_trace[e][i] - policy_trace[e - 1][i]));
        }
        if (dist < delta) return static_cast<int>(e);
    }
    return std::nullopt;
}

double policy_variance(const std::vector<PolicySnapshot>& policies) {
    if (policies.size() < 2) throw DegenerateInputError("policy variance needs >= 2 replications");
    const std::size_t dim = policies[0].size();
    for (const auto& p : policies) {
        if (p.size() != dim) throw DimensionError("policy encodings differ in size");
    }
    std::vector<double> mean(dim, 0.0);
    for (const auto& p : policies) {
        for (std::size_t i = 0; i < dim; ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(policies.size());
    double variance = 0.0;
    for (const auto& p : policies) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = p[i] - mean[i];
            norm2 += d * d;
        }
        variance += norm2;
    }
    return variance / static_cast<double>(policies.size());
}

double pareto_inefficiency(const std::vector<double>& realized_rewards,
                           const RewardParams& rewards, const EnvConfig& cfg,
                           int frontier_samples) {
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    if (realized_rewards.size() != n) throw DimensionError("realized reward vector size mismatch");
    if (frontier_samples < 2) throw DegenerateInputError("frontier needs >= 2 samples");

    // scalarization weight vectors over agents
    std::vector<std::vector<double>> scalarizations;
    if (n == 2) {
        for (int k = 0; k < frontier_samples; ++k) {
            const double theta = static_cast<double>(k) / (frontier_samples - 1);
            scalarizations.push_back({theta, 1.0 - theta});
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> corner(n, 0.0);
            corner[i] = 1.0;
            scalarizations.push_back(corner);
            for (std::size_t k = i + 1; k < n; ++k) {
                std::vector<double> pair(n, 0.0);
                pair[i] = 0.5;
                pair[k] = 0.5;
                scalarizations.push_back(pair);
            }
        }
        scalarizations.push_back(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    double best = std::numeric_limits<double>::infinity();
    const auto m = static_cast<std::size_t>(cfg.m_resources);
    for (const auto& theta : scalarizations) {
        // closed-form optimum of the scalarized objective, per resource
        std::vector<double> state(m);
        for (std::size_t j = 0; j < m; ++j) {
            double wsum = 0.0, wtarget = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = theta[i] * rewards.weights[i][j];
                wsum += w;
                wtarget += w * rewards.targets[i][j];
            }
            state[j] = wsum > 0.0 ? std::clamp(wtarget / wsum, 0.0, cfg.capacity[j])
                                  : 0.5 * cfg.capacity[j];
        }
        double dist2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = realized_rewards[i] - rewards.reward(static_cast<int>(i), state);
            dist2 += d * d;
        }
        best = std::min(best, std::sqrt(dist2));
    }
    return best;
}

double measured_alignment(const RewardParams& rewards, const EnvConfig& cfg, int samples,
                          Rng& rng) {
    if (samples < 2) throw DegenerateInputError("alignment needs >= 2 samples");
    const auto n = static_cast<std::size_t>(cfg.n_agents);
    const auto m = static_cast<std::size_t>(cfg.m_resources);

    std::vector<std::vector<double>> draws(n, std::vector<double>(samples));
    std::vector<double> state(m);
    for (int s = 0; s < samples; ++s) {
        for (std::size_t j = 0; j < m; ++j) state[j] = rng.uniform(0.0, cfg.capacity[j]);
        for (std::size_t i = 0; i < n; ++i) {
            draws[i][static_cast<std::size_t>(s)] = rewards.reward(static_cast<int>(i), state);
        }
    }

    std::vector<double> mean(n, 0.0), var(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : draws[i]) mean[i] += v;
        mean[i] /= samples;
        for (double v : draws[i]) var[i] += (v - mean[i]) * (v - mean[i]);
        if (var[i] <= 0.0) {
            throw UndefinedError("reward variance is zero; correlation undefined");
        }
    }

    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            double cov = 0.0;
            for (int s = 0; s < samples; ++s) {
                cov += (draws[i][static_cast<std::size_t>(s)] - mean[i]) *
                       (draws[k][static_cast<std::size_t>(s)] - mean[k]);
            }
            total += cov / std::sqrt(var[i] * var[k]);
            ++pairs;
        }
    }
    return std::clamp(total / pairs, -1.0, 1.0);
}

namespace {

struct RunOutput {
    MetricsRecord record;
    PolicySnapshot final_policy;
};

RunOutput execute_run(const ExperimentDesign& design, const EnvConfig& env,
                      const AgentConfig& agents, std::size_t condition, int replication) {
    const std::size_t n_sigma = design.sigma_levels.size();
    const std::size_t n_eps = design.epsilon_levels.size();
    const std::size_t ia = condition / (n_sigma * n_eps);
    const std::size_t is = (condition / n_eps) % n_sigma;
    const std::size_t ie = condition % n_eps;

    RunOutput out;
    MetricsRecord& rec = out.record;
    rec.alpha_index = static_cast<int>(ia);
    rec.sigma_index = static_cast<int>(is);
    rec.epsilon_index = static_cast<int>(ie);
    rec.replication = replication;
    rec.alpha = design.alpha_levels[ia];
    rec.sigma = design.sigma_levels[is];
    rec.epsilon = design.epsilon_levels[ie];
    rec.seed = derive_seed(design.master_seed, condition, static_cast<std::uint64_t>(replication));
    rec.theoretical_friction =
        kernel::friction(kernel::KernelTriple(rec.alpha, rec.sigma, rec.epsilon));

    try {
        Rng rng(rec.seed);
        const RewardParams rewards = make_rewards(rec.alpha, rec.sigma, env, rng);
        const TrainResult trained =
            train_agents(env, rewards, agents, agents.episodes, rec.epsilon, rng);

        rec.reward_gap = reward_gap(trained.reward_trace, rewards, env);
        rec.convergence_time = convergence_time(trained.policy_trace, 0.5);
        std::vector<double> realized(static_cast<std::size_t>(env.n_agents), 0.0);
        for (std::size_t i = 0; i < realized.size(); ++i) {
            for (double r : trained.agent_reward_traces[i]) realized[i] += r;
            realized[i] /= static_cast<double>(trained.agent_reward_traces[i].size());
        }
        rec.pareto_inefficiency = pareto_inefficiency(realized, rewards, env);
        rec.measured_alignment = measured_alignment(rewards, env, 8192, rng);
        out.final_policy = trained.policy_trace.back();
    } catch (const Error& e) {
        rec.status = e.what();
    }
    return out;
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentDesign& design, const EnvConfig& env,
                                          const AgentConfig& agents, int workers) {
    design.validate();
    env.validate();
    agents.validate();
    if (workers < 1) throw ParameterError("workers must be >= 1");

    const std::size_t conditions = design.condition_count();
    const std::size_t reps = static_cast<std::size_t>(design.replications);
    const std::size_t total = conditions * reps;
    std::vector<RunOutput> outputs(total);

    std::atomic<std::size_t> cursor{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t run = cursor.fetch_add(1);
            if (run >= total) break;
            outputs[run] = execute_run(design, env, agents, run / reps,
                                       static_cast<int>(run % reps));
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // policy variance is a per-condition statistic over replications
    std::vector<MetricsRecord> records;
    records.reserve(total);
    for (std::size_t c = 0; c < conditions; ++c) {
        std::vector<PolicySnapshot> finals;
        for (std::size_t r = 0; r < reps; ++r) {
            const RunOutput& out = outputs[c * reps + r];
            if (out.record.status == "ok") finals.push_back(out.final_policy);
        }
        double variance = 0.0;
        if (finals.size() >= 2) variance = policy_variance(finals);
        for (std::size_t r = 0; r < reps; ++r) {
            MetricsRecord rec = outputs[c * reps + r].record;
            rec.policy_variance = variance;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::string records_to_csv(const std::vector<MetricsRecord>& records) {
    using csv::format_double;
    std::vector<std::string> header = {
        "alpha_index",   "sigma_index",        "epsilon_index",
        "replication",   "alpha",              "sigma",
        "epsilon",       "seed",               "reward_gap",
        "convergence_time", "policy_variance", "pareto_inefficiency",
        "measured_alignment", "theoretical_friction", "status"};
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back({
            std::to_string(r.alpha_index),
            std::to_string(r.sigma_index),
            std::to_string(r.epsilon_index),
            std::to_string(r.replication),
            format_double(r.alpha),
            format_double(r.sigma),
            format_double(r.epsilon),
            std::to_string(r.seed),
            format_double(r.reward_gap),
            r.convergence_time ? std::to_string(*r.convergence_time) : std::string("never"),
            format_double(r.policy_variance),
            format_double(r.pareto_inefficiency),
            format_double(r.measured_alignment),
            format_double(r.theoretical_friction),
            r.status,
        });
    }
    return csv::emit(csv::Table(std::move(header), std::move(rows)));
}

std::vector<MetricsRecord> records_from_csv(const std::string& text) {
    const csv::Table table = csv::parse(text);
    std::vector<MetricsRecord> records;
    records.reserve(table.row_count());
    const std::size_t ct_col = table.column("convergence_time");
    const std::size_t status_col = table.column("status");
    for (std::size_t i = 0; i < table.row_count(); ++i) {
        MetricsRecord r;
        r.alpha_index = static_cast<int>(table.number(i, table.column("alpha_index")));
        r.sigma_index = static_cast<int>(table.number(i, table.column("sigma_index")));
        r.epsilon_index = static_cast<int>(table.number(i, table.column("epsilon_index")));
        r.replication = static_cast<int>(table.number(i, table.column("replication")));
        r.alpha = table.number(i, table.column("alpha"));
        r.sigma = table.number(i, table.column("sigma"));
        r.epsilon = table.number(i, table.column("epsilon"));
        r.seed = std::stoull(table.cell(i, table.column("seed")));
        r.reward_gap = table.number(i, table.column("reward_gap"));
        if (table.cell(i, ct_col) == "never") {
            r.convergence_time = std::nullopt;
        } else {
            r.convergence_time = static_cast<int>(table.number(i, ct_col));
        }
        r.policy_variance = table.number(i, table.column("policy_variance"));
        r.pareto_inefficiency = table.number(i, table.column("pareto_inefficiency"));
        r.measured_alignment = table.number(i, table.column("measured_alignment"));
        r.theoretical_friction = table.number(i, table.column("theoretical_friction"));
        r.status = table.cell(i, status_col);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace frictionlab::marl
