#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "frictionlab/errors.hpp"

namespace frictionlab::kernel {

// The (alpha, sigma, epsilon) state every friction evaluation consumes.
// alpha = -1 is representable but evaluations reject it as a pole.
struct KernelTriple {
    double alpha;    // alignment in [-1, 1]
    double sigma;    // total stake >= 0
    double epsilon;  // information-loss fraction in [0, 1]

    KernelTriple(double alignment, double stake, double entropy);
};

struct Stakeholder {
    std::string id;
    double stake = 0.0;      // s_i >= 0
    double alignment = 0.0;  // alpha_i in [-1, 1]
    double entropy = 0.0;    // eps_i in [0, 1]
    double voice = 0.0;      // effective voice in [0, 1]
    bool consents = false;

    void validate() const;
};

// Stakeholder roster. The affected set is the members with stake > 0.
class DelegationDomain {
  public:
    explicit DelegationDomain(std::vector<Stakeholder> members);

    const std::vector<Stakeholder>& stakeholders() const { return members_; }
    double total_stake() const { return total_stake_; }
    std::size_t size() const { return members_.size(); }

  private:
    std::vector<Stakeholder> members_;
    double total_stake_;
};

enum class FrictionKind { canonical, additive, multiplicative, exponential, power_law };

struct FrictionForm {
    FrictionKind kind = FrictionKind::canonical;
    double p = 1.0;  // power_law numerator exponent
    double q = 1.0;  // power_law denominator exponent
};

// Piecewise-constant suppression intensity kappa(t). The first breakpoint
// must sit at t = 0; the last value extends to infinity.
class SuppressionSchedule {
  public:
    explicit SuppressionSchedule(std::vector<std::pair<double, double>> breakpoints);

    double kappa_at(double t) const;
    // Exact integral of kappa over [0, t] from the constant segments.
    double integral(double t) const;

    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

  private:
    std::vector<std::pair<double, double>> points_;
};

// Canonical friction sigma * (1 + eps) / (1 + alpha).
double friction(const KernelTriple& k);

// Alternative functional forms (canonical, additive, multiplicative,
// exponential, power-law generalization).
double friction_form(const FrictionForm& form, const KernelTriple& k);

struct FrictionPartials {
    double d_sigma;    // (1+eps)/(1+alpha)
    double d_alpha;    // -sigma(1+eps)/(1+alpha)^2
    double d_epsilon;  // sigma/(1+alpha)
};

FrictionPartials friction_partials(const KernelTriple& k);

// Sum over stakeholders of s_i (1 + eps_i) / (1 + alpha_i).
double friction_aggregate(const DelegationDomain& d);

// Stake-weighted mean of effective voice, in [0, 1].
double legitimacy(const DelegationDomain& d);

// Stake-weighted consent share against threshold theta in (0, 1].
bool is_legitimate(const DelegationDomain& d, double theta);

// Stake-weighted mean of individual alignments.
double aggregate_alignment(const DelegationDomain& d);

// First-order friction error F_hat - F for measurement noise
// (eta_sigma, eta_alpha, eta_epsilon).
double friction_error_propagation(const KernelTriple& k, double eta_sigma, double eta_alpha,
                                  double eta_epsilon);

// F * exp(integral_0^t kappa) for a piecewise-constant suppression schedule.
double latent_friction(double observed, const SuppressionSchedule& schedule, double t);

// psi = 1 - expressed/authentic, clamped to [0, 1].
double falsification_index(double expressed_variance, double authentic_variance);

// ((1-psi) F, psi F); the components sum to F exactly.
std::pair<double, double> falsification_split(double total_friction, double psi);

// assignment[r] = controlling agent of resource r.
using Assignment = std::vector<std::size_t>;

// stakes[agent][resource], alignments[controller][agent][resource],
// entropies[controller][agent].
struct SystemTable {
    std::vector<std::vector<double>> stakes;
    std::vector<std::vector<std::vector<double>>> alignments;
    std::vector<std::vector<double>> entropies;

    std::size_t agent_count() const { return stakes.size(); }
    std::size_t resource_count() const { return stakes.empty() ? 0 : stakes[0].size(); }
    void validate() const;
};

// Sum over resources r and agents j != C(r) of
// stakes[j][r] * (1 + entropies[C(r)][j]) / (1 + alignments[C(r)][j][r]).
double system_friction(const Assignment& assignment, const SystemTable& table);

struct AllocationResult {
    Assignment assignment;
    double objective;
};

// Exhaustive search over the n^m assignments; ties broken toward the
// lexicographically smallest assignment vector. n, m <= 6 enforced.
AllocationResult friction_aware_allocation(const SystemTable& table);

}  // namespace frictionlab::kernel
