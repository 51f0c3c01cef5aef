#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "frictionlab/rom.hpp"

namespace frictionlab::coarse {

// Surjective fine-type -> coarse-type map onto 0..k-1 with no empty class.
class Partition {
  public:
    explicit Partition(std::vector<std::size_t> assignment);

    std::size_t fine_count() const { return assignment_.size(); }
    std::size_t coarse_count() const { return class_count_; }
    std::size_t coarse_of(std::size_t fine) const { return assignment_.at(fine); }
    const std::vector<std::size_t>& assignment() const { return assignment_; }
    const std::vector<std::vector<std::size_t>>& members() const { return members_; }

    static Partition identity(std::size_t n);
    // Composition: fine -> mid -> coarse.
    Partition then(const Partition& outer) const;

  private:
    std::vector<std::size_t> assignment_;
    std::size_t class_count_;
    std::vector<std::vector<std::size_t>> members_;
};

struct LumpabilityReport {
    // condition (i): raw M block sums equal across same-class fine types
    bool transition_uniform = true;
    double transition_worst = 0.0;
    // condition (ii): rho equal within each class
    bool survival_homogeneous = true;
    double survival_worst = 0.0;
    // combined criterion: w rho M block flows equal across same-class types
    bool weighted_flow_uniform = true;
    double weighted_worst = 0.0;
    double tolerance = 0.0;

    bool exactly_lumpable() const { return weighted_flow_uniform; }
};

// Verifies the lumpability conditions for a partition at tolerance tol.
LumpabilityReport check_lumpability(const rom::RomSystem& sys, const Partition& part, double tol);

// Builds the induced coarse system. Coarse survival is the class average
// (identical to any member when exactly lumpable), coarse weight is the
// p-conditional class mean, and coarse mutation rows are p-conditional
// class averages of the fine block sums. Throws LumpabilityError when the
// combined criterion fails at tol.
rom::RomSystem coarse_grain(const rom::RomSystem& sys, const Partition& part,
                            const rom::Population& p,
                            double tol = std::numeric_limits<double>::infinity());

// Coarse probability = sum of member probabilities.
rom::Population project(const rom::Population& p, const Partition& part);

// L-inf distance at the final step between (project . integrate) and
// (integrate . project) with the coarse system built from p0.
double commutation_error(const rom::RomSystem& sys, const Partition& part,
                         const rom::Population& p0, double dt, long steps);

}  // namespace frictionlab::coarse
