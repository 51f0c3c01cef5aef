#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frictionlab/marl.hpp"

namespace frictionlab::analysis {

enum class Model { M1_friction, M2_additive, M3_multiplicative, M4_independent };

std::string model_name(Model m);

struct RegressionResult {
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    double r_squared = 0.0;
    double residual_variance = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n_observations = 0;
};

struct ModelComparison {
    Model model;
    RegressionResult fit;
    double delta_aic = 0.0;  // to the best model
};

struct HypothesisReport {
    std::string id;           // H1..H4
    std::string proxy;        // metric the test ran on
    double statistic = 0.0;   // Spearman rho (H1-H3) or beta_1 (H4)
    double p_value = 1.0;     // one-sided permutation p
    bool direction_satisfied = false;
    bool degenerate = false;  // constant proxy; statistic meaningless
    double r_squared = 0.0;   // H4 only
};

// Proxy column values extracted from records; rows with a failed status or a
// "never" convergence time (for that proxy) are dropped.
std::vector<double> proxy_values(const std::vector<marl::MetricsRecord>& records,
                                 const std::string& proxy);

// Feature matrix for the model: M1 [1, F]; M2 [1, sigma+eps-alpha];
// M3 [1, sigma*eps*(1-alpha)]; M4 [1, alpha, sigma, eps].
std::vector<std::vector<double>> design_matrix(const std::vector<marl::MetricsRecord>& records,
                                               Model model);

// Ordinary least squares with Gaussian-likelihood AIC/BIC.
RegressionResult fit_ols(const std::vector<double>& y,
                         const std::vector<std::vector<double>>& x);

// Fits M1-M4 against the chosen proxy and ranks by AIC, then BIC.
std::vector<ModelComparison> compare_models(const std::vector<marl::MetricsRecord>& records,
                                            const std::string& proxy);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// H1-H3: factor-proxy Spearman signs (-, +, +) with permutation p-values;
// H4: M1 slope sign and fit quality. Permutations are seeded.
std::vector<HypothesisReport> test_hypotheses(const std::vector<marl::MetricsRecord>& records,
                                              const std::string& proxy = "reward_gap",
                                              int permutations = 1000,
                                              std::uint64_t seed = 1234);

// Full regression of the proxy on [1, F, alpha, sigma, eps].
RegressionResult full_regression(const std::vector<marl::MetricsRecord>& records,
                                 const std::string& proxy);

}  // namespace frictionlab::analysis
