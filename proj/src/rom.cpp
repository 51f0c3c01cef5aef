#include "frictionlab/rom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "json.hpp"

#include "frictionlab/errors.hpp"

namespace frictionlab::rom {

namespace {

void check_row_stochastic(const Matrix& m) {
    if (m.empty()) throw DimensionError("mutation matrix is empty");
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) throw DimensionError("mutation matrix must be square");
        double row_sum = 0.0;
        for (double v : m[i]) {
            if (!(v >= 0.0)) throw ParameterError("mutation entries must be >= 0");
            row_sum += v;
        }
        if (std::fabs(row_sum - 1.0) > 1e-9) {
            throw ParameterError("mutation row " + std::to_string(i) + " sums to " +
                                 std::to_string(row_sum) + ", expected 1");
        }
    }
}

void renormalize_rows(Matrix& m) {
    for (auto& row : m) {
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        if (s <= 0.0) throw ParameterError("mutation row collapsed to zero mass");
        for (double& v : row) v /= s;
    }
}

}  // namespace

Population::Population(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) throw DimensionError("population is empty");
    double total = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0)) throw ParameterError("population entries must be >= 0");
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw ParameterError("population must sum to 1 (got " + std::to_string(total) + ")");
    }
}

Population Population::uniform(std::size_t n) {
    if (n == 0) throw DimensionError("population is empty");
    return Population(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double ConsentType::mean_entropy() const {
    const auto& members = domain.stakeholders();
    if (members.empty()) return 0.0;
    double total = 0.0;
    for (const auto& s : members) total += s.entropy;
    return total / static_cast<double>(members.size());
}

double ConsentType::survival() const { return consent_survival(legitimacy(), friction()); }

RomSystem::RomSystem(std::vector<double> weights, std::vector<double> survival, Matrix mutation)
    : weights_(std::move(weights)), survival_(std::move(survival)), mutation_(std::move(mutation)) {
    if (weights_.empty()) throw DimensionError("system needs at least one type");
    if (survival_.size() != weights_.size() || mutation_.size() != weights_.size()) {
        throw DimensionError("weights, survival and mutation sizes differ");
    }
    for (double w : weights_) {
        if (!(w >= 0.0)) throw ParameterError("weights must be >= 0");
    }
    for (double r : survival_) {
        if (!(r >= 0.0) || r > 1.0) throw ParameterError("survival must be in [0, 1]");
    }
    check_row_stochastic(mutation_);
}

std::string RomSystem::to_json() const {
    nlohmann::json doc;
    doc["weights"] = weights_;
    doc["survival"] = survival_;
    doc["mutation"] = mutation_;
    return doc.dump(2);
}

RomSystem RomSystem::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    return RomSystem(doc.at("weights").get<std::vector<double>>(),
                     doc.at("survival").get<std::vector<double>>(),
                     doc.at("mutation").get<Matrix>());
}

RomSystem from_consent_types(const std::vector<ConsentType>& types, Matrix mutation,
                             WeightMode mode) {
    std::vector<double> weights, survival;
    weights.reserve(types.size());
    survival.reserve(types.size());
    for (const auto& t : types) {
        weights.push_back(mode == WeightMode::supporter_stake ? consent_weight(t.domain)
                                                              : t.total_stake());
        survival.push_back(t.survival());
    }
    return RomSystem(std::move(weights), std::move(survival), std::move(mutation));
}

void OwnershipParams::validate() const {
    if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
    if (!(gamma_decay > 0.0)) throw ParameterError("gamma_decay must be > 0");
    if (!(gamma_entrench > 0.0)) throw ParameterError("gamma_entrench must be > 0");
}

double mean_fitness(const Population& p, const RomSystem& sys) {
    if (p.size() != sys.type_count()) throw DimensionError("population/system size mismatch");
    double phi = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        phi += p[i] * sys.weights()[i] * sys.survival()[i];
    }
    return phi;
}

std::vector<double> rom_derivative(const Population& p, const RomSystem& sys) {
    const std::size_t n = sys.type_count();
    if (p.size() != n) throw DimensionError("population/system size mismatch");
    const double phi = mean_fitness(p, sys);
    std::vector<double> dp(n, 0.0);
    for (std::size_t from = 0; from < n; ++from) {
        const double flow = p[from] * sys.weights()[from] * sys.survival()[from];
        for (std::size_t to = 0; to < n; ++to) {
            dp[to] += flow * sys.mutation()[from][to];
        }
    }
    for (std::size_t to = 0; to < n; ++to) dp[to] -= p[to] * phi;
    return dp;
}

namespace {

// Derivative on a raw vector; used by the RK4 stages where intermediate
// states may leave the simplex slightly.
std::vector<double> derivative_raw(const std::vector<double>& p, const RomSystem& sys) {
    const std::size_t n = sys.type_count();
    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) phi += p[i] * sys.weights()[i] * sys.survival()[i];
    std::vector<double> dp(n, 0.0);
    for (std::size_t from = 0; from < n; ++from) {
        const double flow = p[from] * sys.weights()[from] * sys.survival()[from];
        for (std::size_t to = 0; to < n; ++to) dp[to] += flow * sys.mutation()[from][to];
    }
    for (std::size_t to = 0; to < n; ++to) dp[to] -= p[to] * phi;
    return dp;
}

std::vector<double> project_simplex(std::vector<double> p, long step) {
    double total = 0.0;
    for (double& v : p) {
        if (!std::isfinite(v)) throw NumericError("non-finite population value", step);
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (total <= 0.0) throw NumericError("population mass vanished", step);
    for (double& v : p) v /= total;
    return p;
}

}  // namespace

std::vector<Population> rom_integrate(const Population& p0, const RomSystem& sys, double dt,
                                      long steps) {
    if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
    if (steps < 0) throw ParameterError("steps must be >= 0");
    if (p0.size() != sys.type_count()) throw DimensionError("population/system size mismatch");

    const std::size_t n = p0.size();
    std::vector<Population> trajectory;
    trajectory.reserve(static_cast<std::size_t>(steps) + 1);
    trajectory.push_back(p0);

    std::vector<double> p = p0.probs();
    std::vector<double> stage(n);
    for (long step = 0; step < steps; ++step) {
        const std::vector<double> k1 = derivative_raw(p, sys);
        for (std::size_t i = 0; i < n; ++i) stage[i] = p[i] + 0.5 * dt * k1[i];
        const std::vector<double> k2 = derivative_raw(stage, sys);
        for (std::size_t i = 0; i < n; ++i) stage[i] = p[i] + 0.5 * dt * k2[i];
        const std::vector<double> k3 = derivative_raw(stage, sys);
        for (std::size_t i = 0; i < n; ++i) stage[i] = p[i] + dt * k3[i];
        const std::vector<double> k4 = derivative_raw(stage, sys);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        p = project_simplex(std::move(p), step);
        trajectory.push_back(Population(p));
    }
    return trajectory;
}

double consent_survival(double legitimacy, double friction) {
    if (legitimacy < 0.0 || legitimacy > 1.0) throw ParameterError("legitimacy outside [0, 1]");
    if (friction < 0.0) throw ParameterError("friction must be >= 0");
    return legitimacy / (1.0 + friction);
}

double consent_survival_modulated(double rho_base, double friction, double lambda) {
    if (rho_base < 0.0 || rho_base > 1.0) throw ParameterError("rho_base outside [0, 1]");
    if (friction < 0.0) throw ParameterError("friction must be >= 0");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
    return rho_base * std::exp(-lambda * friction);
}

double consent_weight(const kernel::DelegationDomain& d) {
    double total = 0.0;
    for (const auto& s : d.stakeholders()) {
        if (s.consents) total += s.stake;
    }
    return total;
}

Matrix entropy_modulated_mutation(const Matrix& m0, const std::vector<double>& eps_bar,
                                  double lambda) {
    check_row_stochastic(m0);
    if (eps_bar.size() != m0.size()) throw DimensionError("entropy vector size mismatch");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
    for (double e : eps_bar) {
        if (e < 0.0 || e > 1.0) throw ParameterError("entropies must be in [0, 1]");
    }
    // Scaling a whole row cancels under renormalization, so the entropy
    // boost applies to off-diagonal entries only.
    Matrix m = m0;
    for (std::size_t row = 0; row < m.size(); ++row) {
        const double factor = 1.0 + lambda * eps_bar[row];
        for (std::size_t col = 0; col < m[row].size(); ++col) {
            if (col != row) m[row][col] *= factor;
        }
    }
    renormalize_rows(m);
    return m;
}

Matrix ownership_modulated_mutation(const Matrix& m0, const std::vector<double>& ownership,
                                    double gamma_entrench) {
    check_row_stochastic(m0);
    if (ownership.size() != m0.size()) throw DimensionError("ownership vector size mismatch");
    if (!(gamma_entrench > 0.0)) throw ParameterError("gamma_entrench must be > 0");
    for (double o : ownership) {
        if (o < 0.0 || o > 1.0) throw ParameterError("ownership must be in [0, 1]");
    }
    Matrix m = m0;
    for (std::size_t from = 0; from < m.size(); ++from) {
        for (std::size_t to = 0; to < m[from].size(); ++to) {
            m[from][to] *= std::exp(-gamma_entrench * (ownership[from] - ownership[to]));
        }
    }
    renormalize_rows(m);
    return m;
}

std::vector<double> ownership_integrate(double o0, const OwnershipParams& params,
                                        const std::vector<bool>& holding, double dt) {
    params.validate();
    if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
    if (o0 < 0.0 || o0 > 1.0) throw ParameterError("ownership outside [0, 1]");

    std::vector<double> trajectory;
    trajectory.reserve(holding.size() + 1);
    trajectory.push_back(o0);
    double o = o0;
    for (bool holds : holding) {
        const auto deriv = [&](double value) {
            return holds ? params.beta * (1.0 - value) : -params.gamma_decay * value;
        };
        const double k1 = deriv(o);
        const double k2 = deriv(o + 0.5 * dt * k1);
        const double k3 = deriv(o + 0.5 * dt * k2);
        const double k4 = deriv(o + dt * k3);
        o += dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        o = std::clamp(o, 0.0, 1.0);
        trajectory.push_back(o);
    }
    return trajectory;
}

double tenure_transition_hazard(double tenure, const OwnershipParams& params) {
    params.validate();
    if (tenure < 0.0) throw ParameterError("tenure must be >= 0");
    const double ownership = 1.0 - std::exp(-params.beta * tenure);
    return std::exp(-params.gamma_entrench * ownership);
}

bool is_irreducible(const Matrix& m) {
    const std::size_t n = m.size();
    const auto reachable = [&](bool forward) {
        std::vector<bool> seen(n, false);
        std::queue<std::size_t> frontier;
        frontier.push(0);
        seen[0] = true;
        while (!frontier.empty()) {
            const std::size_t u = frontier.front();
            frontier.pop();
            for (std::size_t v = 0; v < n; ++v) {
                const double edge = forward ? m[u][v] : m[v][u];
                if (edge > 0.0 && !seen[v]) {
                    seen[v] = true;
                    frontier.push(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reachable(true) && reachable(false);
}

int chain_period(const Matrix& m) {
    // gcd of (level[u] + 1 - level[v]) over support edges u -> v, with levels
    // assigned by BFS from type 0; valid for irreducible chains.
    const std::size_t n = m.size();
    std::vector<long> level(n, -1);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    level[0] = 0;
    while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < n; ++v) {
            if (m[u][v] > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                frontier.push(v);
            }
        }
    }
    long g = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (level[u] < 0) continue;
        for (std::size_t v = 0; v < n; ++v) {
            if (m[u][v] > 0.0 && level[v] >= 0) {
                g = std::gcd(g, std::labs(level[u] + 1 - level[v]));
            }
        }
    }
    return static_cast<int>(g == 0 ? 1 : g);
}

StationaryResult stationary_distribution(const RomSystem& sys, double tol, long max_iters) {
    if (!(tol > 0.0)) throw ParameterError("tol must be > 0");
    if (max_iters <= 0) throw ParameterError("max_iters must be > 0");
    if (!is_irreducible(sys.mutation())) {
        throw ErgodicityError("mutation kernel is reducible");
    }
    if (chain_period(sys.mutation()) != 1) {
        throw ErgodicityError("mutation kernel is periodic (period " +
                              std::to_string(chain_period(sys.mutation())) + ")");
    }
    for (double r : sys.survival()) {
        if (!(r > 0.0)) throw ErgodicityError("stationary distribution requires survival > 0");
    }

    const std::size_t n = sys.type_count();
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    double residual = 0.0;
    for (long iter = 0; iter <= max_iters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double phi = 0.0;
        for (std::size_t from = 0; from < n; ++from) {
            const double flow = p[from] * sys.weights()[from] * sys.survival()[from];
            phi += flow;
            for (std::size_t to = 0; to < n; ++to) next[to] += flow * sys.mutation()[from][to];
        }
        // residual of the fixed-point condition Q^T p = phi p for the current p
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            residual = std::max(residual, std::fabs(next[i] - phi * p[i]));
        }
        if (residual < tol) {
            return StationaryResult{Population(p), residual, iter};
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        if (!(total > 0.0)) throw IterationError("power iteration collapsed", residual);
        for (std::size_t i = 0; i < n; ++i) p[i] = next[i] / total;
    }
    throw IterationError("power iteration did not converge within " + std::to_string(max_iters) +
                             " iterations",
                         residual);
}

}  // namespace frictionlab::rom
