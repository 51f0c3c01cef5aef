#include "frictionlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frictionlab::kernel {

namespace {

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        throw ParameterError(std::string(name) + " must be finite");
    }
}

// Shared pole check for every form with a (1 + alpha) denominator.
void require_above_pole(double alpha, const std::string& who) {
    if (alpha <= -1.0) {
        throw DivergenceError("friction diverges at alpha = -1 (" + who + ")");
    }
}

}  // namespace

KernelTriple::KernelTriple(double alignment, double stake, double entropy)
    : alpha(alignment), sigma(stake), epsilon(entropy) {
    require_finite(alignment, "alpha");
    require_finite(stake, "sigma");
    require_finite(entropy, "epsilon");
    if (alpha < -1.0 || alpha > 1.0) throw ParameterError("alpha outside [-1, 1]");
    if (sigma < 0.0) throw ParameterError("sigma must be >= 0");
    if (epsilon < 0.0 || epsilon > 1.0) throw ParameterError("epsilon outside [0, 1]");
}

void Stakeholder::validate() const {
    require_finite(stake, "stake");
    require_finite(alignment, "alignment");
    require_finite(entropy, "entropy");
    require_finite(voice, "voice");
    if (stake < 0.0) throw ParameterError("stakeholder " + id + ": stake must be >= 0");
    if (alignment < -1.0 || alignment > 1.0)
        throw ParameterError("stakeholder " + id + ": alignment outside [-1, 1]");
    if (entropy < 0.0 || entropy > 1.0)
        throw ParameterError("stakeholder " + id + ": entropy outside [0, 1]");
    if (voice < 0.0 || voice > 1.0)
        throw ParameterError("stakeholder " + id + ": voice outside [0, 1]");
}

DelegationDomain::DelegationDomain(std::vector<Stakeholder> members)
    : members_(std::move(members)), total_stake_(0.0) {
    for (const auto& s : members_) {
        s.validate();
        total_stake_ += s.stake;
    }
}

SuppressionSchedule::SuppressionSchedule(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.empty()) throw ParameterError("suppression schedule needs at least one segment");
    if (points_.front().first != 0.0)
        throw ParameterError("suppression schedule must start at t = 0");
    double prev = -1.0;
    for (const auto& [t, kappa] : points_) {
        if (t <= prev) throw ParameterError("suppression breakpoints must be strictly increasing");
        if (kappa < 0.0) throw ParameterError("suppression intensity must be >= 0");
        prev = t;
    }
}

double SuppressionSchedule::kappa_at(double t) const {
    if (t < 0.0) throw ParameterError("time must be >= 0");
    double value = points_.front().second;
    for (const auto& [start, kappa] : points_) {
        if (start > t) break;
        value = kappa;
    }
    return value;
}

double SuppressionSchedule::integral(double t) const {
    if (t < 0.0) throw ParameterError("time must be >= 0");
    double total = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double start = points_[i].first;
        if (start >= t) break;
        const double end = (i + 1 < points_.size()) ? std::min(points_[i + 1].first, t) : t;
        total += points_[i].second * (end - start);
    }
    return total;
}

double friction(const KernelTriple& k) {
    require_above_pole(k.alpha, "kernel triple");
    return k.sigma * (1.0 + k.epsilon) / (1.0 + k.alpha);
}

double friction_form(const FrictionForm& form, const KernelTriple& k) {
    switch (form.kind) {
        case FrictionKind::canonical:
            return friction(k);
        case FrictionKind::additive:
            return k.sigma + k.epsilon - k.alpha;
        case FrictionKind::multiplicative:
            return k.sigma * k.epsilon * (1.0 - k.alpha);
        case FrictionKind::exponential:
            return k.sigma * std::exp(k.epsilon - k.alpha);
        case FrictionKind::power_law:
            require_above_pole(k.alpha, "power-law form");
            return k.sigma * std::pow(1.0 + k.epsilon, form.p) / std::pow(1.0 + k.alpha, form.q);
    }
    throw ParameterError("unknown friction form");
}

FrictionPartials friction_partials(const KernelTriple& k) {
    require_above_pole(k.alpha, "kernel triple");
    const double denom = 1.0 + k.alpha;
    return FrictionPartials{
        (1.0 + k.epsilon) / denom,
        -k.sigma * (1.0 + k.epsilon) / (denom * denom),
        k.sigma / denom,
    };
}

double friction_aggregate(const DelegationDomain& d) {
    double total = 0.0;
    for (const auto& s : d.stakeholders()) {
        if (s.alignment <= -1.0) {
            throw DivergenceError("friction diverges at alpha = -1 (stakeholder " + s.id + ")");
        }
        total += s.stake * (1.0 + s.entropy) / (1.0 + s.alignment);
    }
    return total;
}

double legitimacy(const DelegationDomain& d) {
    if (d.total_stake() <= 0.0) {
        throw UndefinedError("legitimacy undefined for zero total stake");
    }
    double weighted = 0.0;
    for (const auto& s : d.stakeholders()) weighted += s.stake * s.voice;
    return weighted / d.total_stake();
}

bool is_legitimate(const DelegationDomain& d, double theta) {
    if (theta <= 0.0 || theta > 1.0) throw ParameterError("theta outside (0, 1]");
    if (d.total_stake() <= 0.0) {
        throw UndefinedError("legitimacy undefined for zero total stake");
    }
    double supporting = 0.0;
    for (const auto& s : d.stakeholders()) {
        if (s.consents) supporting += s.stake;
    }
    return supporting >= theta * d.total_stake();
}

double aggregate_alignment(const DelegationDomain& d) {
    if (d.total_stake() <= 0.0) {
        throw UndefinedError("aggregate alignment undefined for zero total stake");
    }
    double weighted = 0.0;
    for (const auto& s : d.stakeholders()) weighted += s.stake * s.alignment;
    return weighted / d.total_stake();
}

double friction_error_propagation(const KernelTriple& k, double eta_sigma, double eta_alpha,
                                  double eta_epsilon) {
    const FrictionPartials partials = friction_partials(k);
    return partials.d_sigma * eta_sigma + partials.d_epsilon * eta_epsilon +
           partials.d_alpha * eta_alpha;
}

double latent_friction(double observed, const SuppressionSchedule& schedule, double t) {
    if (observed < 0.0) throw ParameterError("observed friction must be >= 0");
    if (t < 0.0) throw ParameterError("time must be >= 0");
    return observed * std::exp(schedule.integral(t));
}

double falsification_index(double expressed_variance, double authentic_variance) {
    if (expressed_variance < 0.0) throw ParameterError("expressed variance must be >= 0");
    if (authentic_variance <= 0.0) {
        throw UndefinedError("falsification index undefined for zero authentic variance");
    }
    const double psi = 1.0 - expressed_variance / authentic_variance;
    return std::clamp(psi, 0.0, 1.0);
}

std::pair<double, double> falsification_split(double total_friction, double psi) {
    if (total_friction < 0.0) throw ParameterError("total friction must be >= 0");
    if (psi < 0.0 || psi > 1.0) throw ParameterError("psi outside [0, 1]");
    // compute the larger share first so the complement subtraction is exact
    if (psi <= 0.5) {
        const double observed = (1.0 - psi) * total_friction;
        return {observed, total_friction - observed};
    }
    const double latent = psi * total_friction;
    return {total_friction - latent, latent};
}

void SystemTable::validate() const {
    const std::size_t n = agent_count();
    const std::size_t m = resource_count();
    if (n == 0 || m == 0) throw DimensionError("system table must be non-empty");
    for (const auto& row : stakes) {
        if (row.size() != m) throw DimensionError("ragged stakes matrix");
    }
    if (alignments.size() != n) throw DimensionError("alignments tensor: controller count");
    for (const auto& per_agent : alignments) {
        if (per_agent.size() != n) throw DimensionError("alignments tensor: agent count");
        for (const auto& per_resource : per_agent) {
            if (per_resource.size() != m) throw DimensionError("alignments tensor: resource count");
        }
    }
    if (entropies.size() != n) throw DimensionError("entropies matrix: controller count");
    for (const auto& row : entropies) {
        if (row.size() != n) throw DimensionError("entropies matrix: agent count");
    }
}

double system_friction(const Assignment& assignment, const SystemTable& table) {
    table.validate();
    const std::size_t n = table.agent_count();
    const std::size_t m = table.resource_count();
    if (assignment.size() != m) throw DimensionError("assignment must cover every resource");
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t c = assignment[r];
        if (c >= n) throw ParameterError("assignment names an unknown agent");
        for (std::size_t j = 0; j < n; ++j) {
            if (j == c) continue;
            const double alpha = table.alignments[c][j][r];
            if (alpha <= -1.0) {
                std::ostringstream oss;
                oss << "friction diverges at alpha = -1 (controller " << c << ", agent " << j
                    << ", resource " << r << ")";
                throw DivergenceError(oss.str());
            }
            total += table.stakes[j][r] * (1.0 + table.entropies[c][j]) / (1.0 + alpha);
        }
    }
    return total;
}

AllocationResult friction_aware_allocation(const SystemTable& table) {
    table.validate();
    const std::size_t n = table.agent_count();
    const std::size_t m = table.resource_count();
    if (n > 6 || m > 6) {
        throw SizeError("friction_aware_allocation is exhaustive; limited to n, m <= 6");
    }

    Assignment current(m, 0);
    AllocationResult best{current, system_friction(current, table)};
    // Iterate assignments in lexicographic order; strict improvement keeps
    // the lexicographically smallest minimizer.
    while (true) {
        std::size_t pos = m;
        while (pos > 0) {
            --pos;
            if (current[pos] + 1 < n) {
                ++current[pos];
                std::fill(current.begin() + static_cast<long>(pos) + 1, current.end(), 0);
                break;
            }
            if (pos == 0) return best;
        }
        const double objective = system_friction(current, table);
        if (objective < best.objective) {
            best.assignment = current;
            best.objective = objective;
        }
    }
}

}  // namespace frictionlab::kernel
