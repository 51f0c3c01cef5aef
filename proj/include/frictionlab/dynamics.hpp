#pragma once

#include <string>
#include <vector>

#include "frictionlab/kernel.hpp"

namespace frictionlab::dynamics {

// Piecewise-linear function of time from breakpoint (t, value) pairs.
// Constant extension beyond the ends; the derivative is exact per segment.
class PiecewiseLinear {
  public:
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> breakpoints);

    double value(double t) const;
    double derivative(double t) const;
    double start_time() const { return points_.front().first; }
    double end_time() const { return points_.back().first; }
    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

  private:
    std::vector<std::pair<double, double>> points_;
};

// Exogenous (sigma, alpha, epsilon) path. Range constraints are enforced
// at the breakpoints; linearity keeps the interior inside them.
struct ParameterPath {
    PiecewiseLinear sigma;
    PiecewiseLinear alpha;
    PiecewiseLinear epsilon;

    ParameterPath(PiecewiseLinear s, PiecewiseLinear a, PiecewiseLinear e);

    kernel::KernelTriple at(double t) const;
};

// Per-stakeholder stake and voice paths.
struct VoiceStakePath {
    std::vector<PiecewiseLinear> stakes;
    std::vector<PiecewiseLinear> voices;

    VoiceStakePath(std::vector<PiecewiseLinear> stake_paths,
                   std::vector<PiecewiseLinear> voice_paths);
};

// dF/dt = (1+eps)/(1+alpha) dsigma - sigma(1+eps)/(1+alpha)^2 dalpha
//         + sigma/(1+alpha) deps.
double friction_rate(const kernel::KernelTriple& k, double d_sigma, double d_alpha,
                     double d_epsilon);

// Equals friction_rate; zero iff the equilibrium condition holds, and the
// sign gives the direction of friction drift.
double equilibrium_residual(const kernel::KernelTriple& k, double d_sigma, double d_alpha,
                            double d_epsilon);

struct LyapunovViolation {
    double time;
    std::string condition;  // which requirement failed
    double value;
};

struct LyapunovReport {
    bool sigma_bounded = true;        // (i)  sigma <= sigma_max
    bool alignment_improving = true;  // (ii) dalpha/dt >= 0
    bool entropy_nonincreasing = true;  // (iii) deps/dt <= 0
    bool sigma_static = true;           // dsigma/dt == 0 on the sampled grid
    bool friction_nonincreasing = true;  // checked when (i)-(iii) hold and sigma is static
    std::vector<LyapunovViolation> violations;

    bool conditions_hold() const {
        return sigma_bounded && alignment_improving && entropy_nonincreasing;
    }
};

// Samples the path on a uniform grid over [0, horizon] and verifies the
// Lyapunov conditions; when they hold with static sigma, asserts F is
// non-increasing sample-to-sample within 1e-9 slack.
LyapunovReport lyapunov_check(const ParameterPath& path, double horizon, int samples,
                              double sigma_max);

// dL/dt = sum (s_i / S) dv_i + sum ((v_i - L)/S) ds_i.
double legitimacy_rate(const kernel::DelegationDomain& d, const std::vector<double>& voice_rates,
                       const std::vector<double>& stake_rates);

}  // namespace frictionlab::dynamics
