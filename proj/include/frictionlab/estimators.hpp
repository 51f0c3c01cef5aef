#pragma once

#include <cstddef>
#include <vector>

namespace frictionlab::estimators {

// Preference vector over k outcome dimensions; cosine operations require
// nonzero norm.
using PreferenceVector = std::vector<double>;

// Joint distribution over (X, Y) symbol pairs: matrix[x][y] >= 0, total 1.
class DiscreteJoint {
  public:
    explicit DiscreteJoint(std::vector<std::vector<double>> matrix);

    const std::vector<std::vector<double>>& matrix() const { return matrix_; }
    std::vector<double> marginal_x() const;
    std::vector<double> marginal_y() const;

  private:
    std::vector<std::vector<double>> matrix_;
};

// Return series with strictly increasing timestamps.
class ReturnSeries {
  public:
    ReturnSeries(std::vector<double> timestamps, std::vector<double> returns);

    const std::vector<double>& timestamps() const { return timestamps_; }
    const std::vector<double>& returns() const { return returns_; }

    // Sample standard deviation over the half-open index range [begin, end).
    double stddev(std::size_t begin, std::size_t end) const;

  private:
    std::vector<double> timestamps_;
    std::vector<double> returns_;
};

// -- alignment --------------------------------------------------------------

// Cosine of the agent and consent-holder preference vectors.
double alignment_survey(const PreferenceVector& agent, const PreferenceVector& holder);

// sign(dh) * (1 - exp(-lambda |dh|)) from a holdings change.
double alignment_market(double delta_holdings, double lambda);

struct Party {
    double vote_share;          // >= 0, shares sum to 1
    PreferenceVector position;  // nonzero norm
};

// Vote-share-weighted cosine against the government position.
double alignment_vote(const std::vector<Party>& parties, const PreferenceVector& government);

// -- stakes -----------------------------------------------------------------

struct Outcome {
    double wealth;
    double probability;
};

// E|W(O) - W(O')| over independent outcome pairs.
double stake_monetary(const std::vector<Outcome>& outcomes);

// sum_t delta^t stakes[t].
double stake_present_value(const std::vector<double>& stakes, double delta);

// (max L - min L) * sensitivity.
double stake_computational(const std::vector<double>& losses, double sensitivity);

struct PoliticalStakeWeights {
    double proximity = 0.4;
    double reversibility = 0.3;
    double magnitude = 0.3;
};

// Weighted linear combination of the three [0,1] scores.
double stake_political(double proximity, double reversibility, double magnitude,
                       const PoliticalStakeWeights& weights = {});

// -- entropy ----------------------------------------------------------------

// KL divergence sum_k p log(p / p_hat), natural log.
double entropy_kl(const std::vector<double>& truth, const std::vector<double>& estimate);

// 1 - I(X;Y)/H(X) in [0, 1].
double entropy_channel(const DiscreteJoint& joint);

// Mean squared estimate error (1/n) sum_i ||est_i - true_i||^2.
double entropy_misperception(const std::vector<PreferenceVector>& truth,
                             const std::vector<PreferenceVector>& estimates);

// -- friction proxies ---------------------------------------------------------

// Realized / baseline volatility from index windows of a return series.
double proxy_volatility(const ReturnSeries& series, std::size_t baseline_begin,
                        std::size_t baseline_end, std::size_t event_begin, std::size_t event_end);
double proxy_volatility(double realized, double baseline);

// Convex combination of normalized instability components.
double proxy_institutional(const std::vector<double>& components,
                           const std::vector<double>& weights);

// 1 - achieved / optimal.
double proxy_coordination(double reward_achieved, double reward_optimal);

// Coordination cost share of total cost.
double proxy_overhead(double coordination_cost, double total_cost);

}  // namespace frictionlab::estimators
