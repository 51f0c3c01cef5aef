#include "frictionlab/estimators.hpp"

#include <cmath>
#include <string>

#include "frictionlab/errors.hpp"

namespace frictionlab::estimators {

namespace {

double norm(const PreferenceVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine(const PreferenceVector& a, const PreferenceVector& b) {
    if (a.size() != b.size()) throw DimensionError("preference vectors differ in length");
    if (a.empty()) throw DegenerateInputError("empty preference vector");
    for (double x : a) {
        if (!std::isfinite(x)) throw ParameterError("non-finite preference entry");
    }
    for (double x : b) {
        if (!std::isfinite(x)) throw ParameterError("non-finite preference entry");
    }
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw DegenerateInputError("zero-norm preference vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    const double c = dot / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<std::vector<double>> matrix)
    : matrix_(std::move(matrix)) {
    if (matrix_.empty() || matrix_[0].empty()) throw DegenerateInputError("empty joint table");
    const std::size_t cols = matrix_[0].size();
    double total = 0.0;
    for (const auto& row : matrix_) {
        if (row.size() != cols) throw DimensionError("ragged joint table");
        for (double p : row) {
            if (!(p >= 0.0)) throw ParameterError("joint probabilities must be >= 0");
            total += p;
        }
    }
    if (std::fabs(total - 1.0) > 1e-9) {
        throw ParameterError("joint probabilities must sum to 1 (got " + std::to_string(total) +
                             ")");
    }
}

std::vector<double> DiscreteJoint::marginal_x() const {
    std::vector<double> px(matrix_.size(), 0.0);
    for (std::size_t x = 0; x < matrix_.size(); ++x) {
        for (double p : matrix_[x]) px[x] += p;
    }
    return px;
}

std::vector<double> DiscreteJoint::marginal_y() const {
    std::vector<double> py(matrix_[0].size(), 0.0);
    for (const auto& row : matrix_) {
        for (std::size_t y = 0; y < row.size(); ++y) py[y] += row[y];
    }
    return py;
}

ReturnSeries::ReturnSeries(std::vector<double> timestamps, std::vector<double> returns)
    : timestamps_(std::move(timestamps)), returns_(std::move(returns)) {
    if (timestamps_.size() != returns_.size()) {
        throw DimensionError("timestamps and returns differ in length");
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        if (!(timestamps_[i] > timestamps_[i - 1])) {
            throw ParameterError("timestamps must be strictly increasing");
        }
    }
}

double ReturnSeries::stddev(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > returns_.size()) throw ParameterError("bad return-series window");
    const std::size_t n = end - begin;
    if (n < 2) throw DegenerateInputError("volatility window needs at least 2 returns");
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += returns_[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = returns_[i] - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double alignment_survey(const PreferenceVector& agent, const PreferenceVector& holder) {
    return cosine(agent, holder);
}

double alignment_market(double delta_holdings, double lambda) {
    if (!(lambda > 0.0)) throw ParameterError("market sensitivity lambda must be > 0");
    if (delta_holdings == 0.0) return 0.0;
    const double sign = delta_holdings > 0.0 ? 1.0 : -1.0;
    return sign * (1.0 - std::exp(-lambda * std::fabs(delta_holdings)));
}

double alignment_vote(const std::vector<Party>& parties, const PreferenceVector& government) {
    if (parties.empty()) throw DegenerateInputError("no parties");
    double share_total = 0.0;
    double result = 0.0;
    for (const auto& party : parties) {
        if (party.vote_share < 0.0) throw ParameterError("vote shares must be >= 0");
        share_total += party.vote_share;
        result += party.vote_share * cosine(party.position, government);
    }
    if (std::fabs(share_total - 1.0) > 1e-9) {
        throw ParameterError("vote shares must sum to 1");
    }
    return std::clamp(result, -1.0, 1.0);
}

double stake_monetary(const std::vector<Outcome>& outcomes) {
    if (outcomes.size() < 2) throw DegenerateInputError("monetary stake needs >= 2 outcomes");
    double ptotal = 0.0;
    for (const auto& o : outcomes) {
        if (o.probability < 0.0) throw ParameterError("outcome probabilities must be >= 0");
        ptotal += o.probability;
    }
    if (std::fabs(ptotal - 1.0) > 1e-9) throw ParameterError("outcome probabilities must sum to 1");
    // expectation over independent pairs (O, O') from the same distribution
    double stake = 0.0;
    for (const auto& a : outcomes) {
        for (const auto& b : outcomes) {
            stake += a.probability * b.probability * std::fabs(a.wealth - b.wealth);
        }
    }
    return stake;
}

double stake_present_value(const std::vector<double>& stakes, double delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) throw ParameterError("discount delta outside (0, 1)");
    if (stakes.empty()) throw DegenerateInputError("empty stake stream");
    double value = 0.0;
    double factor = 1.0;
    for (double s : stakes) {
        if (s < 0.0) throw ParameterError("stakes must be >= 0");
        value += factor * s;
        factor *= delta;
    }
    return value;
}

double stake_computational(const std::vector<double>& losses, double sensitivity) {
    if (losses.empty()) throw DegenerateInputError("empty loss list");
    if (sensitivity < 0.0) throw ParameterError("sensitivity must be >= 0");
    double lo = losses[0], hi = losses[0];
    for (double l : losses) {
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    return (hi - lo) * sensitivity;
}

double stake_political(double proximity, double reversibility, double magnitude,
                       const PoliticalStakeWeights& weights) {
    for (double score : {proximity, reversibility, magnitude}) {
        if (score < 0.0 || score > 1.0) throw ParameterError("political scores must be in [0, 1]");
    }
    for (double w : {weights.proximity, weights.reversibility, weights.magnitude}) {
        if (w < 0.0) throw ParameterError("political weights must be >= 0");
    }
    return weights.proximity * proximity + weights.reversibility * reversibility +
           weights.magnitude * magnitude;
}

double entropy_kl(const std::vector<double>& truth, const std::vector<double>& estimate) {
    if (truth.size() != estimate.size()) throw DimensionError("distribution supports differ");
    if (truth.empty()) throw DegenerateInputError("empty distributions");
    double pt = 0.0, pe = 0.0;
    for (double p : truth) {
        if (p < 0.0) throw ParameterError("probabilities must be >= 0");
        pt += p;
    }
    for (double p : estimate) {
        if (p < 0.0) throw ParameterError("probabilities must be >= 0");
        pe += p;
    }
    if (std::fabs(pt - 1.0) > 1e-9 || std::fabs(pe - 1.0) > 1e-9) {
        throw ParameterError("distributions must sum to 1");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) continue;
        if (estimate[i] <= 0.0) {
            throw DivergenceError("KL divergence infinite: estimate is zero at index " +
                                  std::to_string(i) + " where truth is positive");
        }
        kl += truth[i] * std::log(truth[i] / estimate[i]);
    }
    return std::max(kl, 0.0);
}

double entropy_channel(const DiscreteJoint& joint) {
    const auto px = joint.marginal_x();
    const auto py = joint.marginal_y();
    // H(X) accumulated as sum p log(1/p) so that the deterministic-channel
    // terms are bitwise identical to the mutual-information terms.
    double hx = 0.0;
    for (double p : px) {
        if (p > 0.0) hx += p * std::log(1.0 / p);
    }
    if (hx <= 0.0) throw UndefinedError("channel entropy undefined: H(X) = 0");
    double mi = 0.0;
    const auto& m = joint.matrix();
    for (std::size_t x = 0; x < m.size(); ++x) {
        for (std::size_t y = 0; y < m[x].size(); ++y) {
            const double p = m[x][y];
            if (p > 0.0) mi += p * std::log(p / (px[x] * py[y]));
        }
    }
    return std::clamp(1.0 - mi / hx, 0.0, 1.0);
}

double entropy_misperception(const std::vector<PreferenceVector>& truth,
                             const std::vector<PreferenceVector>& estimates) {
    if (truth.size() != estimates.size() || truth.empty()) {
        throw DimensionError("misperception: matrix shapes differ");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != estimates[i].size()) {
            throw DimensionError("misperception: row " + std::to_string(i) + " shapes differ");
        }
        for (std::size_t k = 0; k < truth[i].size(); ++k) {
            const double d = estimates[i][k] - truth[i][k];
            total += d * d;
        }
    }
    return total / static_cast<double>(truth.size());
}

double proxy_volatility(const ReturnSeries& series, std::size_t baseline_begin,
                        std::size_t baseline_end, std::size_t event_begin,
                        std::size_t event_end) {
    return proxy_volatility(series.stddev(event_begin, event_end),
                            series.stddev(baseline_begin, baseline_end));
}

double proxy_volatility(double realized, double baseline) {
    if (realized < 0.0) throw ParameterError("realized volatility must be >= 0");
    if (!(baseline > 0.0)) throw UndefinedError("volatility ratio undefined: zero baseline");
    return realized / baseline;
}

double proxy_institutional(const std::vector<double>& components,
                           const std::vector<double>& weights) {
    if (components.size() != weights.size() || components.empty()) {
        throw DimensionError("institutional proxy: components and weights differ");
    }
    double wsum = 0.0, value = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i] < 0.0 || components[i] > 1.0) {
            throw ParameterError("institutional components must be in [0, 1]");
        }
        if (weights[i] < 0.0 || weights[i] > 1.0) {
            throw ParameterError("institutional weights must be in [0, 1]");
        }
        wsum += weights[i];
        value += weights[i] * components[i];
    }
    if (std::fabs(wsum - 1.0) > 1e-9) throw ParameterError("institutional weights must sum to 1");
    return value;
}

double proxy_coordination(double reward_achieved, double reward_optimal) {
    if (reward_optimal == 0.0) {
        throw UndefinedError("coordination proxy undefined: zero optimal reward");
    }
    return 1.0 - reward_achieved / reward_optimal;
}

double proxy_overhead(double coordination_cost, double total_cost) {
    if (coordination_cost < 0.0) throw ParameterError("coordination cost must be >= 0");
    if (!(total_cost > 0.0)) throw UndefinedError("overhead undefined: zero total cost");
    return coordination_cost / total_cost;
}

}  // namespace frictionlab::estimators
