#include "frictionlab/coarse.hpp"

#include <algorithm>
#include <cmath>

#include "frictionlab/errors.hpp"

namespace frictionlab::coarse {

Partition::Partition(std::vector<std::size_t> assignment) : assignment_(std::move(assignment)) {
    if (assignment_.empty()) throw ParameterError("partition of an empty type space");
    class_count_ = *std::max_element(assignment_.begin(), assignment_.end()) + 1;
    members_.assign(class_count_, {});
    for (std::size_t fine = 0; fine < assignment_.size(); ++fine) {
        members_[assignment_[fine]].push_back(fine);
    }
    for (std::size_t c = 0; c < class_count_; ++c) {
        if (members_[c].empty()) {
            throw ParameterError("partition class " + std::to_string(c) + " is empty");
        }
    }
}

Partition Partition::identity(std::size_t n) {
    std::vector<std::size_t> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = i;
    return Partition(std::move(a));
}

Partition Partition::then(const Partition& outer) const {
    if (outer.fine_count() != coarse_count()) {
        throw DimensionError("partition composition sizes do not match");
    }
    std::vector<std::size_t> composed(fine_count());
    for (std::size_t fine = 0; fine < fine_count(); ++fine) {
        composed[fine] = outer.coarse_of(assignment_[fine]);
    }
    return Partition(std::move(composed));
}

namespace {

// Per fine type: block sums of `row_values` into coarse classes.
std::vector<std::vector<double>> block_sums(const rom::Matrix& m, const Partition& part,
                                            const std::vector<double>& scale) {
    const std::size_t n = part.fine_count();
    const std::size_t k = part.coarse_count();
    std::vector<std::vector<double>> sums(n, std::vector<double>(k, 0.0));
    for (std::size_t from = 0; from < n; ++from) {
        for (std::size_t to = 0; to < n; ++to) {
            sums[from][part.coarse_of(to)] += scale[from] * m[from][to];
        }
    }
    return sums;
}

double in_class_spread(const std::vector<std::vector<double>>& per_type_sums,
                       const Partition& part) {
    double worst = 0.0;
    for (const auto& group : part.members()) {
        for (std::size_t target = 0; target < part.coarse_count(); ++target) {
            double lo = per_type_sums[group[0]][target];
            double hi = lo;
            for (std::size_t fine : group) {
                lo = std::min(lo, per_type_sums[fine][target]);
                hi = std::max(hi, per_type_sums[fine][target]);
            }
            worst = std::max(worst, hi - lo);
        }
    }
    return worst;
}

}  // namespace

LumpabilityReport check_lumpability(const rom::RomSystem& sys, const Partition& part,
                                    double tol) {
    if (part.fine_count() != sys.type_count()) {
        throw DimensionError("partition size does not match the type count");
    }
    if (!(tol >= 0.0)) throw ParameterError("tolerance must be >= 0");

    LumpabilityReport report;
    report.tolerance = tol;

    const std::vector<double> ones(sys.type_count(), 1.0);
    report.transition_worst = in_class_spread(block_sums(sys.mutation(), part, ones), part);
    report.transition_uniform = report.transition_worst <= tol;

    for (const auto& group : part.members()) {
        double lo = sys.survival()[group[0]];
        double hi = lo;
        for (std::size_t fine : group) {
            lo = std::min(lo, sys.survival()[fine]);
            hi = std::max(hi, sys.survival()[fine]);
        }
        report.survival_worst = std::max(report.survival_worst, hi - lo);
    }
    report.survival_homogeneous = report.survival_worst <= tol;

    std::vector<double> flow(sys.type_count());
    for (std::size_t i = 0; i < sys.type_count(); ++i) {
        flow[i] = sys.weights()[i] * sys.survival()[i];
    }
    report.weighted_worst = in_class_spread(block_sums(sys.mutation(), part, flow), part);
    report.weighted_flow_uniform = report.weighted_worst <= tol;

    return report;
}

rom::RomSystem coarse_grain(const rom::RomSystem& sys, const Partition& part,
                            const rom::Population& p, double tol) {
    if (p.size() != sys.type_count()) throw DimensionError("population/system size mismatch");
    if (std::isfinite(tol)) {
        // conditions (i) + (ii): exactly what makes rho' and M' well-defined
        const LumpabilityReport report = check_lumpability(sys, part, tol);
        if (!report.transition_uniform || !report.survival_homogeneous) {
            throw LumpabilityError(
                "partition is not lumpable at tolerance " + std::to_string(tol) +
                " (worst transition deviation " + std::to_string(report.transition_worst) +
                ", worst survival spread " + std::to_string(report.survival_worst) + ")");
        }
    }

    const std::size_t k = part.coarse_count();
    std::vector<double> weights(k, 0.0), survival(k, 0.0);
    rom::Matrix mutation(k, std::vector<double>(k, 0.0));

    for (std::size_t c = 0; c < k; ++c) {
        const auto& group = part.members()[c];
        double mass = 0.0;
        for (std::size_t fine : group) mass += p[fine];

        // conditional weights; uniform over the class when the class carries
        // no probability mass
        std::vector<double> cond(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            cond[i] = mass > 0.0 ? p[group[i]] / mass
                                 : 1.0 / static_cast<double>(group.size());
        }

        for (std::size_t i = 0; i < group.size(); ++i) {
            weights[c] += cond[i] * sys.weights()[group[i]];
            survival[c] += sys.survival()[group[i]] / static_cast<double>(group.size());
        }

        // class-averaged representative row of block sums
        for (std::size_t i = 0; i < group.size(); ++i) {
            for (std::size_t to = 0; to < sys.type_count(); ++to) {
                mutation[c][part.coarse_of(to)] += cond[i] * sys.mutation()[group[i]][to];
            }
        }
    }

    // guard against drift in the row sums before the invariant check
    for (auto& row : mutation) {
        double sum = 0.0;
        for (double v : row) sum += v;
        if (sum > 0.0) {
            for (double& v : row) v /= sum;
        }
    }
    return rom::RomSystem(std::move(weights), std::move(survival), std::move(mutation));
}

rom::Population project(const rom::Population& p, const Partition& part) {
    if (p.size() != part.fine_count()) throw DimensionError("population/partition size mismatch");
    std::vector<double> coarse(part.coarse_count(), 0.0);
    for (std::size_t fine = 0; fine < p.size(); ++fine) {
        coarse[part.coarse_of(fine)] += p[fine];
    }
    return rom::Population(std::move(coarse));
}

double commutation_error(const rom::RomSystem& sys, const Partition& part,
                         const rom::Population& p0, double dt, long steps) {
    const rom::RomSystem coarse_sys = coarse_grain(sys, part, p0);
    const auto fine_traj = rom::rom_integrate(p0, sys, dt, steps);
    const auto coarse_traj = rom::rom_integrate(project(p0, part), coarse_sys, dt, steps);
    const rom::Population projected = project(fine_traj.back(), part);
    const rom::Population& evolved = coarse_traj.back();
    double err = 0.0;
    for (std::size_t i = 0; i < projected.size(); ++i) {
        err = std::max(err, std::fabs(projected[i] - evolved[i]));
    }
    return err;
}

}  // namespace frictionlab::coarse
