#include <cmath>
#include <vector>

#include "doctest.h"
#include "frictionlab/kernel.hpp"
#include "frictionlab/rng.hpp"

using namespace frictionlab;
using namespace frictionlab::kernel;

namespace {

KernelTriple triple(double alpha, double sigma, double eps) { return {alpha, sigma, eps}; }

DelegationDomain domain(std::vector<Stakeholder> members) {
    return DelegationDomain(std::move(members));
}

Stakeholder holder(double stake, double alignment, double entropy, double voice = 1.0,
                   bool consents = true) {
    Stakeholder s;
    s.id = "s";
    s.stake = stake;
    s.alignment = alignment;
    s.entropy = entropy;
    s.voice = voice;
    s.consents = consents;
    return s;
}

KernelTriple random_triple(Rng& rng, double alpha_lo = -0.99, double alpha_hi = 0.99) {
    return {rng.uniform(alpha_lo, alpha_hi), rng.uniform(0.01, 10.0), rng.uniform(0.0, 1.0)};
}

}  // namespace

TEST_CASE("kernel triple rejects out-of-range values") {
    CHECK_THROWS_AS(triple(1.5, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(triple(0.0, -0.1, 0.0), ParameterError);
    CHECK_THROWS_AS(triple(0.0, 1.0, 1.5), ParameterError);
    CHECK_THROWS_AS(triple(0.0, 1.0, -0.1), ParameterError);
    CHECK_NOTHROW(triple(-1.0, 1.0, 0.0));  // representable, rejected only at evaluation
}

TEST_CASE("canonical friction") {
    CHECK(friction(triple(1.0, 1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(friction(triple(0.3, 0.0, 0.7)) == 0.0);
    CHECK(friction(triple(0.0, 2.0, 1.0)) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(friction(triple(-1.0, 1.0, 0.0)), DivergenceError);
}

TEST_CASE("alternative friction forms") {
    const KernelTriple k = triple(0.0, 1.0, 0.0);
    CHECK(friction_form({FrictionKind::power_law, 1.0, 1.0}, k) == friction(k));
    CHECK(friction_form({FrictionKind::additive}, k) == doctest::Approx(1.0));
    CHECK(friction_form({FrictionKind::exponential}, k) == doctest::Approx(1.0));
    CHECK(friction_form({FrictionKind::multiplicative}, k) == doctest::Approx(0.0));
    CHECK_THROWS_AS(friction_form({FrictionKind::power_law, 2.0, 1.0}, triple(-1.0, 1.0, 0.0)),
                    DivergenceError);

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const KernelTriple t = random_triple(rng);
        const double canonical = friction(t);
        const double power = friction_form({FrictionKind::power_law, 1.0, 1.0}, t);
        CHECK(power == doctest::Approx(canonical).epsilon(1e-12));
    }
}

TEST_CASE("friction partials") {
    const FrictionPartials p = friction_partials(triple(0.0, 1.0, 0.0));
    CHECK(p.d_sigma == doctest::Approx(1.0));
    CHECK(p.d_alpha == doctest::Approx(-1.0));
    CHECK(p.d_epsilon == doctest::Approx(1.0));

    const FrictionPartials z = friction_partials(triple(0.0, 0.0, 0.0));
    CHECK(z.d_sigma == doctest::Approx(1.0));
    CHECK(z.d_alpha == 0.0);
    CHECK(z.d_epsilon == 0.0);

    CHECK_THROWS_AS(friction_partials(triple(-1.0, 1.0, 0.0)), DivergenceError);
}

TEST_CASE("friction partials match central finite differences") {
    Rng rng(42);
    const double h = 1e-5;
    for (int i = 0; i < 300; ++i) {
        const KernelTriple k = random_triple(rng, -0.95, 0.95);
        // keep epsilon stencil inside [0, 1]
        const double eps = rng.uniform(h, 1.0 - h);
        const KernelTriple t = triple(k.alpha, k.sigma, eps);
        const FrictionPartials p = friction_partials(t);

        const double fd_sigma =
            (friction(triple(t.alpha, t.sigma + h, t.epsilon)) -
             friction(triple(t.alpha, t.sigma - h, t.epsilon))) /
            (2 * h);
        const double fd_alpha =
            (friction(triple(t.alpha + h, t.sigma, t.epsilon)) -
             friction(triple(t.alpha - h, t.sigma, t.epsilon))) /
            (2 * h);
        const double fd_eps =
            (friction(triple(t.alpha, t.sigma, t.epsilon + h)) -
             friction(triple(t.alpha, t.sigma, t.epsilon - h))) /
            (2 * h);

        CHECK(p.d_sigma == doctest::Approx(fd_sigma).epsilon(1e-6));
        CHECK(p.d_alpha == doctest::Approx(fd_alpha).epsilon(1e-6));
        CHECK(p.d_epsilon == doctest::Approx(fd_eps).epsilon(1e-6));
    }
}

TEST_CASE("friction aggregate") {
    CHECK(friction_aggregate(domain({holder(1, 1, 0)})) == doctest::Approx(0.5));

    const double two = friction_aggregate(domain({holder(1, 0, 0), holder(1, 0, 0)}));
    CHECK(two == doctest::Approx(friction(triple(0.0, 2.0, 0.0))).epsilon(1e-15));

    const double mixed = friction_aggregate(domain({holder(1, 1, 0), holder(2, 0, 1)}));
    CHECK(mixed == doctest::Approx(4.5));

    auto bad = domain({holder(1, 0, 0), holder(1, -1, 0)});
    CHECK_THROWS_WITH_AS(friction_aggregate(bad),
                         doctest::Contains("stakeholder"), DivergenceError);
}

TEST_CASE("homogeneous aggregate equals pooled friction") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double alpha = rng.uniform(-0.9, 1.0);
        const double eps = rng.uniform(0.0, 1.0);
        std::vector<Stakeholder> members;
        double total = 0.0;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int j = 0; j < n; ++j) {
            const double stake = rng.uniform(0.0, 5.0);
            members.push_back(holder(stake, alpha, eps));
            total += stake;
        }
        const double agg = friction_aggregate(domain(members));
        const double pooled = friction(triple(alpha, total, eps));
        CHECK(agg == doctest::Approx(pooled).epsilon(1e-12));
    }
}

TEST_CASE("inevitable friction: aggregate >= total_stake / 2") {
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        std::vector<Stakeholder> members;
        const int n = 1 + static_cast<int>(rng.below(8));
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            const double stake = rng.uniform(0.001, 4.0);
            members.push_back(
                holder(stake, rng.uniform(-0.99, 1.0), rng.uniform(0.0, 1.0)));
            total += stake;
        }
        const double f = friction_aggregate(domain(members));
        CHECK(f > 0.0);
        CHECK(f >= total / 2.0 - 1e-12);
    }
}

TEST_CASE("legitimacy") {
    CHECK(legitimacy(domain({holder(1, 0, 0, 1.0), holder(2, 0, 0, 1.0)})) == doctest::Approx(1.0));
    CHECK(legitimacy(domain({holder(1, 0, 0, 0.0), holder(2, 0, 0, 0.0)})) == doctest::Approx(0.0));
    CHECK(legitimacy(domain({holder(3, 0, 0, 1.0), holder(1, 0, 0, 0.0)})) ==
          doctest::Approx(0.75));
    CHECK_THROWS_AS(legitimacy(domain({holder(0, 0, 0, 1.0)})), UndefinedError);
}

TEST_CASE("legitimacy is invariant under uniform stake rescaling") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        std::vector<Stakeholder> members;
        const int n = 1 + static_cast<int>(rng.below(5));
        for (int j = 0; j < n; ++j) {
            members.push_back(holder(rng.uniform(0.1, 3.0), 0.0, 0.0, rng.uniform01()));
        }
        const double base = legitimacy(domain(members));
        for (double lambda : {0.5, 2.0, 10.0}) {
            auto scaled = members;
            for (auto& s : scaled) s.stake *= lambda;
            CHECK(legitimacy(domain(scaled)) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("is_legitimate") {
    auto d = domain({holder(3, 0, 0, 1.0, true), holder(1, 0, 0, 1.0, false)});
    CHECK(is_legitimate(d, 0.7));
    CHECK_FALSE(is_legitimate(d, 0.8));

    auto unanimous = domain({holder(1, 0, 0, 1.0, true), holder(5, 0, 0, 1.0, true)});
    CHECK(is_legitimate(unanimous, 1.0));

    auto nobody = domain({holder(1, 0, 0, 1.0, false), holder(5, 0, 0, 1.0, false)});
    CHECK_FALSE(is_legitimate(nobody, 0.01));

    CHECK_THROWS_AS(is_legitimate(d, 0.0), ParameterError);
    CHECK_THROWS_AS(is_legitimate(d, 1.2), ParameterError);
    CHECK_THROWS_AS(is_legitimate(domain({holder(0, 0, 0)}), 0.5), UndefinedError);
}

TEST_CASE("aggregate alignment") {
    CHECK(aggregate_alignment(domain({holder(1, 1, 0), holder(1, -1, 0)})) == doctest::Approx(0.0));
    CHECK(aggregate_alignment(domain({holder(2, 0.4, 0)})) == doctest::Approx(0.4));
    CHECK(aggregate_alignment(domain({holder(3, 1, 0), holder(1, -1, 0)})) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(aggregate_alignment(domain({holder(0, 0, 0)})), UndefinedError);
}

TEST_CASE("error propagation first-order formula") {
    CHECK(friction_error_propagation(triple(0.0, 1.0, 0.0), 0.0, 0.01, 0.0) ==
          doctest::Approx(-0.01));
    CHECK(friction_error_propagation(triple(0.3, 2.0, 0.5), 0.0, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(friction_error_propagation(triple(-1.0, 1.0, 0.0), 0.0, 0.0, 0.0),
                    DivergenceError);
}

TEST_CASE("error propagation tracks Monte-Carlo friction deviations") {
    // Oracle: per-draw actual deviation friction(k + eta) - friction(k).
    const KernelTriple k = triple(0.0, 1.0, 0.0);
    Rng rng(2024);
    const double stddev = 1e-3;
    const int samples = 100000;
    double sum_actual = 0.0, sum_abs_actual = 0.0, sum_abs_err = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double es = rng.gauss(0.0, stddev);
        const double ea = rng.gauss(0.0, stddev);
        const double ee = rng.gauss(0.0, stddev);
        const double actual =
            friction(triple(k.alpha + ea, k.sigma + es, std::fabs(k.epsilon + ee))) -
            friction(triple(k.alpha, k.sigma, k.epsilon));
        // epsilon is reflected at 0 to stay in range; |ee| << 1 so the
        // reflected draw is still Gaussian-like around 0.
        const double predicted = friction_error_propagation(k, es, ea, std::fabs(ee));
        sum_actual += actual;
        sum_abs_actual += std::fabs(actual);
        sum_abs_err += std::fabs(predicted - actual);
    }
    // First-order predictions track actual deviations to well under 5%.
    CHECK(sum_abs_err / sum_abs_actual < 0.05);
    // The mean shift itself is second-order small relative to the deviation scale.
    CHECK(std::fabs(sum_actual / samples) < 0.05 * (sum_abs_actual / samples));
}

TEST_CASE("latent friction") {
    SuppressionSchedule zero({{0.0, 0.0}});
    CHECK(latent_friction(3.0, zero, 100.0) == doctest::Approx(3.0));

    SuppressionSchedule constant({{0.0, 0.1}});
    CHECK(latent_friction(1.0, constant, 10.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));

    SuppressionSchedule two_segment({{0.0, 0.2}, {5.0, 0.0}});
    CHECK(latent_friction(2.0, two_segment, 10.0) ==
          doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));

    CHECK_THROWS_AS(latent_friction(1.0, zero, -1.0), ParameterError);
    CHECK_THROWS_AS(SuppressionSchedule({{1.0, 0.1}}), ParameterError);
    CHECK_THROWS_AS(SuppressionSchedule({{0.0, 0.1}, {0.0, 0.2}}), ParameterError);
    CHECK_THROWS_AS(SuppressionSchedule({{0.0, -0.1}}), ParameterError);
}

TEST_CASE("falsification index") {
    CHECK(falsification_index(1.0, 1.0) == doctest::Approx(0.0));
    CHECK(falsification_index(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(falsification_index(0.36, 1.0) == doctest::Approx(0.64));
    CHECK(falsification_index(2.0, 1.0) == 0.0);  // clamped
    CHECK_THROWS_AS(falsification_index(1.0, 0.0), UndefinedError);
}

TEST_CASE("falsification split") {
    auto [obs0, lat0] = falsification_split(5.0, 0.0);
    CHECK(obs0 == 5.0);
    CHECK(lat0 == 0.0);

    auto [obs1, lat1] = falsification_split(5.0, 1.0);
    CHECK(obs1 == 0.0);
    CHECK(lat1 == 5.0);

    auto [obs, lat] = falsification_split(10.0, 0.3);
    CHECK(obs == doctest::Approx(7.0));
    CHECK(lat == doctest::Approx(3.0));

    CHECK_THROWS_AS(falsification_split(1.0, 1.5), ParameterError);

    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double f = rng.uniform(0.0, 100.0);
        const double psi = rng.uniform01();
        auto [o, l] = falsification_split(f, psi);
        CHECK(o >= 0.0);
        CHECK(l >= 0.0);
        CHECK(o + l == f);  // exact by construction
    }
}

namespace {

// Independent brute-force double sum for system friction.
double naive_system_friction(const Assignment& a, const SystemTable& t) {
    double total = 0.0;
    for (std::size_t r = 0; r < t.resource_count(); ++r) {
        for (std::size_t j = 0; j < t.agent_count(); ++j) {
            if (j != a[r]) {
                total += t.stakes[j][r] * (1.0 + t.entropies[a[r]][j]) /
                         (1.0 + t.alignments[a[r]][j][r]);
            }
        }
    }
    return total;
}

SystemTable random_table(Rng& rng, std::size_t n, std::size_t m) {
    SystemTable t;
    t.stakes.assign(n, std::vector<double>(m));
    t.alignments.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(m)));
    t.entropies.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < m; ++r) t.stakes[i][r] = rng.uniform(0.0, 3.0);
        for (std::size_t j = 0; j < n; ++j) {
            t.entropies[i][j] = rng.uniform01();
            for (std::size_t r = 0; r < m; ++r) t.alignments[i][j][r] = rng.uniform(-0.9, 1.0);
        }
    }
    return t;
}

}  // namespace

TEST_CASE("system friction") {
    SUBCASE("controller excluded from the sum") {
        SystemTable t;
        t.stakes = {{1.0}};
        t.alignments = {{{0.0}}};
        t.entropies = {{0.0}};
        CHECK(system_friction({0}, t) == 0.0);
    }

    SUBCASE("one resource, two agents") {
        SystemTable t;
        t.stakes = {{0.5}, {1.0}};
        t.alignments = {{{1.0}, {0.0}}, {{0.0}, {1.0}}};
        t.entropies = {{0.0, 0.0}, {0.0, 0.0}};
        CHECK(system_friction({0}, t) == doctest::Approx(1.0));
    }

    SUBCASE("matches the naive double sum") {
        Rng rng(31);
        for (int i = 0; i < 100; ++i) {
            SystemTable t = random_table(rng, 3, 2);
            Assignment a = {rng.below(3), rng.below(3)};
            CHECK(system_friction(a, t) == doctest::Approx(naive_system_friction(a, t)));
        }
    }

    SUBCASE("pole detection") {
        SystemTable t;
        t.stakes = {{1.0}, {1.0}};
        t.alignments = {{{1.0}, {-1.0}}, {{0.0}, {1.0}}};
        t.entropies = {{0.0, 0.0}, {0.0, 0.0}};
        CHECK_THROWS_AS(system_friction({0}, t), DivergenceError);
    }
}

namespace {

// Exhaustive enumeration oracle, written independently of the implementation.
AllocationResult enumerate_best(const SystemTable& t) {
    const std::size_t n = t.agent_count();
    const std::size_t m = t.resource_count();
    AllocationResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> a(m, 0);
    const std::size_t total = static_cast<std::size_t>(std::pow(double(n), double(m)));
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rest = code;
        for (std::size_t r = m; r-- > 0;) {
            a[r] = rest % n;
            rest /= n;
        }
        const double obj = naive_system_friction(a, t);
        if (obj < best.objective) {
            best.objective = obj;
            best.assignment = a;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("friction-aware allocation") {
    SUBCASE("single agent controls everything") {
        Rng rng(3);
        SystemTable t = random_table(rng, 1, 3);
        const AllocationResult r = friction_aware_allocation(t);
        CHECK(r.assignment == Assignment{0, 0, 0});
    }

    SUBCASE("prefers the better-aligned controller") {
        SystemTable t;
        t.stakes = {{1.0}, {1.0}};
        // controller A: alignment 0.9 toward the other agent; controller B: 0.0
        t.alignments = {{{1.0}, {0.9}}, {{0.0}, {1.0}}};
        t.entropies = {{0.0, 0.5}, {0.5, 0.0}};
        const AllocationResult r = friction_aware_allocation(t);
        CHECK(r.assignment == Assignment{0});
    }

    SUBCASE("matches the exhaustive enumeration oracle") {
        Rng rng(77);
        for (int i = 0; i < 50; ++i) {
            SystemTable t = random_table(rng, 3, 2);
            const AllocationResult got = friction_aware_allocation(t);
            const AllocationResult want = enumerate_best(t);
            CHECK(got.objective == doctest::Approx(want.objective));
            CHECK(got.assignment == want.assignment);
            // optimality against every assignment
            std::vector<std::size_t> a(2, 0);
            for (a[0] = 0; a[0] < 3; ++a[0]) {
                for (a[1] = 0; a[1] < 3; ++a[1]) {
                    CHECK(got.objective <= naive_system_friction(a, t) + 1e-12);
                }
            }
        }
    }

    SUBCASE("rejects oversized instances") {
        Rng rng(9);
        SystemTable t = random_table(rng, 7, 1);
        CHECK_THROWS_AS(friction_aware_allocation(t), SizeError);
    }
}

TEST_CASE("friction desiderata") {
    Rng rng(101);
    const double h = 1e-6;
    for (int i = 0; i < 1000; ++i) {
        const double sigma = rng.uniform(0.01, 10.0);
        const double alpha = rng.uniform(-0.99, 0.99);
        const double eps = rng.uniform(h, 1.0 - h);
        const KernelTriple k = triple(alpha, sigma, eps);
        const double f = friction(k);

        // D1 non-negativity, D2 zero-stakes triviality
        CHECK(f >= 0.0);
        CHECK(friction(triple(alpha, 0.0, eps)) == 0.0);

        // D3-D5 finite-difference monotonicity signs (+, -, +)
        CHECK(friction(triple(alpha, sigma + h, eps)) - friction(triple(alpha, sigma - h, eps)) >
              0.0);
        CHECK(friction(triple(alpha + h, sigma, eps)) - friction(triple(alpha - h, sigma, eps)) <
              0.0);
        CHECK(friction(triple(alpha, sigma, eps + h)) - friction(triple(alpha, sigma, eps - h)) >
              0.0);

        // D7 finiteness at perfect alignment
        CHECK(std::isfinite(friction(triple(1.0, sigma, eps))));

        // D9 scale invariance in sigma
        for (double lambda : {0.5, 2.0, 10.0}) {
            CHECK(friction(triple(alpha, lambda * sigma, eps)) ==
                  doctest::Approx(lambda * f).epsilon(1e-12));
        }

        // D10 irreducible baseline, exact
        CHECK(friction(triple(1.0, sigma, 0.0)) == sigma / 2.0);
    }

    // D6 divergence near the pole
    for (int k = 3; k <= 6; ++k) {
        const double alpha = -1.0 + std::pow(10.0, -k);
        CHECK(friction(triple(alpha, 1.0, 0.0)) > std::pow(10.0, k - 1));
    }
}
