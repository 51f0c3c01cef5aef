#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "frictionlab/kernel.hpp"

namespace frictionlab::rom {

using Matrix = std::vector<std::vector<double>>;

// Point on the probability simplex.
class Population {
  public:
    explicit Population(std::vector<double> probabilities);

    const std::vector<double>& probs() const { return p_; }
    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }

    static Population uniform(std::size_t n);

  private:
    std::vector<double> p_;
};

// Consent configuration attached to a type: supplies L, F, sigma and the
// mean entropy, plus the mean ownership perception.
struct ConsentType {
    kernel::DelegationDomain domain;
    double mean_ownership = 0.0;  // in [0, 1]

    double legitimacy() const { return kernel::legitimacy(domain); }
    double friction() const { return kernel::friction_aggregate(domain); }
    double total_stake() const { return domain.total_stake(); }
    double mean_entropy() const;
    double survival() const;  // L / (1 + F)
};

// Type space with weights, survival probabilities and a row-stochastic
// mutation kernel.
class RomSystem {
  public:
    RomSystem(std::vector<double> weights, std::vector<double> survival, Matrix mutation);

    std::size_t type_count() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& survival() const { return survival_; }
    const Matrix& mutation() const { return mutation_; }

    std::string to_json() const;
    static RomSystem from_json(const std::string& text);

  private:
    std::vector<double> weights_;
    std::vector<double> survival_;
    Matrix mutation_;
};

enum class WeightMode {
    supporter_stake,  // sum of consenting stakeholders' stakes
    total_stake,      // total stake regardless of consent
};

// Builds a RomSystem from consent configurations: survival L/(1+F) per type,
// weight per the selected mode, mutation kernel supplied by the caller.
RomSystem from_consent_types(const std::vector<ConsentType>& types, Matrix mutation,
                             WeightMode mode = WeightMode::supporter_stake);

struct OwnershipParams {
    double beta;            // accumulation rate > 0
    double gamma_decay;     // decay rate > 0
    double gamma_entrench;  // entrenchment scale > 0

    void validate() const;
};

// phi_bar = sum_tau p w rho.
double mean_fitness(const Population& p, const RomSystem& sys);

// dp(tau)/dt = sum_tau' p w rho M(tau'->tau) - p(tau) phi_bar.
std::vector<double> rom_derivative(const Population& p, const RomSystem& sys);

// Fixed-step RK4 on the simplex; negatives are clipped and the state
// renormalized after every step. Returns steps+1 points including p0.
std::vector<Population> rom_integrate(const Population& p0, const RomSystem& sys, double dt,
                                      long steps);

// rho = L / (1 + F).
double consent_survival(double legitimacy, double friction);

// rho_base * exp(-lambda F).
double consent_survival_modulated(double rho_base, double friction, double lambda);

// Sum of supporters' stakes.
double consent_weight(const kernel::DelegationDomain& d);

// Scales off-diagonal row entries by (1 + lambda eps_bar(row)), then
// renormalizes each row.
Matrix entropy_modulated_mutation(const Matrix& m0, const std::vector<double>& eps_bar,
                                  double lambda);

// Scales entry (tau', tau) by exp(-gamma (O(tau') - O(tau))), then
// renormalizes each row.
Matrix ownership_modulated_mutation(const Matrix& m0, const std::vector<double>& ownership,
                                    double gamma_entrench);

// RK4 on dO/dt = beta (1 - O) [holding] - gamma_decay O [not holding].
// holding(step) gives the consent flag on [step*dt, (step+1)*dt).
std::vector<double> ownership_integrate(double o0, const OwnershipParams& params,
                                        const std::vector<bool>& holding, double dt);

// exp(-gamma (1 - exp(-beta tenure))): unnormalized transition hazard.
double tenure_transition_hazard(double tenure, const OwnershipParams& params);

struct StationaryResult {
    Population distribution;
    double residual;
    long iterations;
};

// Power iteration on Q(tau', tau) = w rho M; requires an irreducible,
// aperiodic mutation kernel and strictly positive survival.
StationaryResult stationary_distribution(const RomSystem& sys, double tol, long max_iters);

// Ergodicity checks on the support graph of M.
bool is_irreducible(const Matrix& m);
int chain_period(const Matrix& m);

}  // namespace frictionlab::rom
