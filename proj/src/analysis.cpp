#include "frictionlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "frictionlab/errors.hpp"
#include "frictionlab/kernel.hpp"
#include "frictionlab/rng.hpp"

namespace frictionlab::analysis {

std::string model_name(Model m) {
    switch (m) {
        case Model::M1_friction: return "M1";
        case Model::M2_additive: return "M2";
        case Model::M3_multiplicative: return "M3";
        case Model::M4_independent: return "M4";
    }
    return "?";
}

namespace {

std::vector<const marl::MetricsRecord*> usable_records(
    const std::vector<marl::MetricsRecord>& records, const std::string& proxy) {
    std::vector<const marl::MetricsRecord*> out;
    for (const auto& r : records) {
        if (r.status != "ok") continue;
        if (proxy == "convergence_time" && !r.convergence_time) continue;
        out.push_back(&r);
    }
    return out;
}

double proxy_of(const marl::MetricsRecord& r, const std::string& proxy) {
    if (proxy == "reward_gap") return r.reward_gap;
    if (proxy == "convergence_time") return static_cast<double>(*r.convergence_time);
    if (proxy == "policy_variance") return r.policy_variance;
    if (proxy == "pareto_inefficiency") return r.pareto_inefficiency;
    throw ParameterError("unknown proxy: " + proxy);
}

}  // namespace

std::vector<double> proxy_values(const std::vector<marl::MetricsRecord>& records,
                                 const std::string& proxy) {
    std::vector<double> values;
    for (const auto* r : usable_records(records, proxy)) values.push_back(proxy_of(*r, proxy));
    return values;
}

std::vector<std::vector<double>> design_matrix(const std::vector<marl::MetricsRecord>& records,
                                               Model model) {
    if (records.empty()) throw DegenerateInputError("no records");
    std::vector<std::vector<double>> x;
    x.reserve(records.size());
    for (const auto& r : records) {
        if (r.alpha <= -1.0) throw DivergenceError("record with alpha = -1 rejected");
        switch (model) {
            case Model::M1_friction:
                x.push_back({1.0, r.sigma * (1.0 + r.epsilon) / (1.0 + r.alpha)});
                break;
            case Model::M2_additive:
                x.push_back({1.0, r.sigma + r.epsilon - r.alpha});
                break;
            case Model::M3_multiplicative:
                x.push_back({1.0, r.sigma * r.epsilon * (1.0 - r.alpha)});
                break;
            case Model::M4_independent:
                x.push_back({1.0, r.alpha, r.sigma, r.epsilon});
                break;
        }
    }
    return x;
}

RegressionResult fit_ols(const std::vector<double>& y,
                         const std::vector<std::vector<double>>& x) {
    const std::size_t n = y.size();
    if (n == 0 || x.size() != n) throw DimensionError("design matrix / response size mismatch");
    const std::size_t k = x[0].size();
    if (n < k) throw DegenerateInputError("fewer rows than columns");

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Eigen::VectorXd response(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i].size() != k) throw DimensionError("ragged design matrix");
        for (std::size_t j = 0; j < k; ++j) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i][j];
        }
        response(static_cast<Eigen::Index>(i)) = y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(k)) {
        throw DegenerateInputError("singular design matrix (rank " + std::to_string(qr.rank()) +
                                   " < " + std::to_string(k) + ")");
    }
    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd residuals = response - design * beta;
    const double rss = residuals.squaredNorm();
    const double mean_y = response.mean();
    const double tss = (response.array() - mean_y).square().sum();

    RegressionResult result;
    result.n_observations = n;
    result.coefficients.assign(beta.data(), beta.data() + k);
    result.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    result.residual_variance = n > k ? rss / static_cast<double>(n - k) : 0.0;

    const Eigen::MatrixXd xtx_inv =
        (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(
            static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    result.std_errors.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        result.std_errors[j] = std::sqrt(std::max(
            0.0, result.residual_variance * xtx_inv(static_cast<Eigen::Index>(j),
                                                    static_cast<Eigen::Index>(j))));
    }

    // Gaussian log-likelihood information criteria; RSS floored to keep
    // exact fits finite.
    const double rss_floor = std::max(rss, 1e-300);
    const double nn = static_cast<double>(n);
    result.aic = nn * std::log(rss_floor / nn) + 2.0 * static_cast<double>(k);
    result.bic = nn * std::log(rss_floor / nn) + static_cast<double>(k) * std::log(nn);
    return result;
}

std::vector<ModelComparison> compare_models(const std::vector<marl::MetricsRecord>& records,
                                            const std::string& proxy) {
    const auto usable = usable_records(records, proxy);
    if (usable.size() < 10) throw DegenerateInputError("model comparison needs >= 10 records");
    std::vector<marl::MetricsRecord> rows;
    std::vector<double> y;
    for (const auto* r : usable) {
        rows.push_back(*r);
        y.push_back(proxy_of(*r, proxy));
    }

    std::vector<ModelComparison> table;
    for (Model m : {Model::M1_friction, Model::M2_additive, Model::M3_multiplicative,
                    Model::M4_independent}) {
        ModelComparison row;
        row.model = m;
        row.fit = fit_ols(y, design_matrix(rows, m));
        table.push_back(std::move(row));
    }
    std::stable_sort(table.begin(), table.end(), [](const auto& a, const auto& b) {
        if (a.fit.aic != b.fit.aic) return a.fit.aic < b.fit.aic;
        return a.fit.bic < b.fit.bic;
    });
    const double best_aic = table.front().fit.aic;
    for (auto& row : table) row.delta_aic = row.fit.aic - best_aic;
    return table;
}

namespace {

std::vector<double> ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double average = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = average;
        i = j + 1;
    }
    return rank;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// One-sided permutation p-value for `statistic` under shuffles of y.
template <typename Statistic>
double permutation_p(const std::vector<double>& y, int permutations, std::uint64_t seed,
                     double observed, int direction, Statistic statistic) {
    Rng rng(seed);
    std::vector<double> shuffled = y;
    long as_extreme = 0;
    for (int p = 0; p < permutations; ++p) {
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(shuffled[i - 1], shuffled[j]);
        }
        const double stat = statistic(shuffled);
        if (direction > 0 ? stat >= observed : stat <= observed) ++as_extreme;
    }
    return static_cast<double>(as_extreme + 1) / static_cast<double>(permutations + 1);
}

bool is_constant(const std::vector<double>& v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DimensionError("spearman needs two equal-length vectors of size >= 2");
    }
    return pearson(ranks(x), ranks(y));
}

std::vector<HypothesisReport> test_hypotheses(const std::vector<marl::MetricsRecord>& records,
                                              const std::string& proxy, int permutations,
                                              std::uint64_t seed) {
    const auto usable = usable_records(records, proxy);
    if (usable.size() < 3) throw DegenerateInputError("hypothesis tests need >= 3 records");

    std::vector<double> y;
    std::vector<double> alpha, sigma, eps;
    std::vector<marl::MetricsRecord> rows;
    for (const auto* r : usable) {
        y.push_back(proxy_of(*r, proxy));
        alpha.push_back(r->alpha);
        sigma.push_back(r->sigma);
        eps.push_back(r->epsilon);
        rows.push_back(*r);
    }

    std::vector<HypothesisReport> reports;
    const bool degenerate = is_constant(y);

    struct FactorTest {
        const char* id;
        const std::vector<double>* factor;
        int direction;  // predicted sign of the Spearman correlation
    };
    const FactorTest tests[] = {
        {"H1", &alpha, -1},
        {"H2", &sigma, +1},
        {"H3", &eps, +1},
    };
    int salt = 0;
    for (const auto& t : tests) {
        HypothesisReport rep;
        rep.id = t.id;
        rep.proxy = proxy;
        rep.degenerate = degenerate || is_constant(*t.factor);
        if (!rep.degenerate) {
            rep.statistic = spearman(*t.factor, y);
            rep.direction_satisfied = t.direction > 0 ? rep.statistic > 0 : rep.statistic < 0;
            const std::vector<double> factor_ranks = ranks(*t.factor);
            rep.p_value = permutation_p(
                y, permutations, seed + static_cast<std::uint64_t>(salt), rep.statistic,
                t.direction, [&](const std::vector<double>& perm) {
                    return pearson(factor_ranks, ranks(perm));
                });
        }
        reports.push_back(std::move(rep));
        ++salt;
    }

    // H4: friction-model slope
    {
        HypothesisReport rep;
        rep.id = "H4";
        rep.proxy = proxy;
        rep.degenerate = degenerate;
        if (!degenerate) {
            const auto x = design_matrix(rows, Model::M1_friction);
            const RegressionResult fit = fit_ols(y, x);
            rep.statistic = fit.coefficients[1];
            rep.r_squared = fit.r_squared;
            rep.direction_satisfied = rep.statistic > 0.0;
            rep.p_value = permutation_p(
                y, permutations, seed + static_cast<std::uint64_t>(salt), rep.statistic, +1,
                [&](const std::vector<double>& perm) {
                    return fit_ols(perm, x).coefficients[1];
                });
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

RegressionResult full_regression(const std::vector<marl::MetricsRecord>& records,
                                 const std::string& proxy) {
    const auto usable = usable_records(records, proxy);
    if (usable.size() < 5) throw DegenerateInputError("full regression needs >= 5 records");
    std::vector<double> y;
    std::vector<std::vector<double>> x;
    for (const auto* r : usable) {
        y.push_back(proxy_of(*r, proxy));
        x.push_back({1.0, kernel::friction(kernel::KernelTriple(r->alpha, r->sigma, r->epsilon)),
                     r->alpha, r->sigma, r->epsilon});
    }
    return fit_ols(y, x);
}

}  // namespace frictionlab::analysis
