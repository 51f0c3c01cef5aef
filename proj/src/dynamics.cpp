#include "frictionlab/dynamics.hpp"

#include <cmath>

#include "frictionlab/errors.hpp"

namespace frictionlab::dynamics {

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.empty()) throw ParameterError("path needs at least one breakpoint");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i].first > points_[i - 1].first)) {
            throw ParameterError("breakpoint times must be strictly increasing");
        }
    }
}

double PiecewiseLinear::value(double t) const {
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (t <= points_[i].first) {
            const auto& [t0, v0] = points_[i - 1];
            const auto& [t1, v1] = points_[i];
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    return points_.back().second;
}

double PiecewiseLinear::derivative(double t) const {
    if (t < points_.front().first || t >= points_.back().first) return 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (t < points_[i].first) {
            const auto& [t0, v0] = points_[i - 1];
            const auto& [t1, v1] = points_[i];
            return (v1 - v0) / (t1 - t0);
        }
    }
    return 0.0;
}

ParameterPath::ParameterPath(PiecewiseLinear s, PiecewiseLinear a, PiecewiseLinear e)
    : sigma(std::move(s)), alpha(std::move(a)), epsilon(std::move(e)) {
    for (const auto& [t, v] : alpha.breakpoints()) {
        if (v <= -1.0 || v > 1.0) throw ParameterError("alpha path leaves (-1, 1]");
    }
    for (const auto& [t, v] : epsilon.breakpoints()) {
        if (v < 0.0 || v > 1.0) throw ParameterError("epsilon path leaves [0, 1]");
    }
    for (const auto& [t, v] : sigma.breakpoints()) {
        if (v < 0.0) throw ParameterError("sigma path goes negative");
    }
}

kernel::KernelTriple ParameterPath::at(double t) const {
    return kernel::KernelTriple(alpha.value(t), sigma.value(t), epsilon.value(t));
}

VoiceStakePath::VoiceStakePath(std::vector<PiecewiseLinear> stake_paths,
                               std::vector<PiecewiseLinear> voice_paths)
    : stakes(std::move(stake_paths)), voices(std::move(voice_paths)) {
    if (stakes.size() != voices.size()) {
        throw DimensionError("stake and voice path counts differ");
    }
    for (const auto& path : voices) {
        for (const auto& [t, v] : path.breakpoints()) {
            if (v < 0.0 || v > 1.0) throw ParameterError("voice path leaves [0, 1]");
        }
    }
    for (const auto& path : stakes) {
        for (const auto& [t, v] : path.breakpoints()) {
            if (v < 0.0) throw ParameterError("stake path goes negative");
        }
    }
}

double friction_rate(const kernel::KernelTriple& k, double d_sigma, double d_alpha,
                     double d_epsilon) {
    const kernel::FrictionPartials p = kernel::friction_partials(k);
    return p.d_sigma * d_sigma + p.d_alpha * d_alpha + p.d_epsilon * d_epsilon;
}

double equilibrium_residual(const kernel::KernelTriple& k, double d_sigma, double d_alpha,
                            double d_epsilon) {
    return friction_rate(k, d_sigma, d_alpha, d_epsilon);
}

LyapunovReport lyapunov_check(const ParameterPath& path, double horizon, int samples,
                              double sigma_max) {
    if (samples < 2) throw ParameterError("lyapunov check needs at least 2 samples");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");

    LyapunovReport report;
    const double dt = horizon / static_cast<double>(samples - 1);
    double prev_friction = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = dt * static_cast<double>(i);
        const double sigma = path.sigma.value(t);
        const double d_alpha = path.alpha.derivative(t);
        const double d_eps = path.epsilon.derivative(t);
        const double d_sigma = path.sigma.derivative(t);

        if (sigma > sigma_max) {
            report.sigma_bounded = false;
            report.violations.push_back({t, "sigma exceeds sigma_max", sigma});
        }
        if (d_alpha < 0.0) {
            report.alignment_improving = false;
            report.violations.push_back({t, "dalpha/dt < 0", d_alpha});
        }
        if (d_eps > 0.0) {
            report.entropy_nonincreasing = false;
            report.violations.push_back({t, "deps/dt > 0", d_eps});
        }
        if (d_sigma != 0.0) report.sigma_static = false;

        const double f = kernel::friction(path.at(t));
        if (i > 0 && report.conditions_hold() && report.sigma_static &&
            f > prev_friction + 1e-9) {
            report.friction_nonincreasing = false;
            report.violations.push_back({t, "friction increased", f - prev_friction});
        }
        prev_friction = f;
    }
    return report;
}

double legitimacy_rate(const kernel::DelegationDomain& d, const std::vector<double>& voice_rates,
                       const std::vector<double>& stake_rates) {
    const auto& members = d.stakeholders();
    if (voice_rates.size() != members.size() || stake_rates.size() != members.size()) {
        throw DimensionError("rate vectors must match the stakeholder count");
    }
    const double total = d.total_stake();
    if (total <= 0.0) throw UndefinedError("legitimacy rate undefined for zero total stake");
    const double big_l = kernel::legitimacy(d);
    double rate = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        rate += members[i].stake / total * voice_rates[i];
        rate += (members[i].voice - big_l) / total * stake_rates[i];
    }
    return rate;
}

}  // namespace frictionlab::dynamics
