#include "oracles.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/markov.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace ttoi;

namespace {

double frob_distance(const DenseTensor& a, const DenseTensor& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(a.data()[i] - b.data()[i], 2);
    return std::sqrt(s);
}

void expect_stochastic(const DenseTensor& p, double tol)
{
    for (double v : p.data()) EXPECT_GE(v, 0.0);
    EXPECT_LE(max_fiber_sum_error(p), tol);
}

// First-order chain on 3 states whose transitions are point masses i -> i+1.
MarkovModel cyclic_model()
{
    DenseTensor p({3, 3});
    for (std::size_t i = 0; i < 3; ++i) p.at({i, (i + 1) % 3}) = 1.0;
    return {3, 1, p};
}

}  // namespace

TEST(ValidateTransition, RejectsBadTensors)
{
    DenseTensor p({2, 2}, {0.5, 0.5, 0.5, 0.5});
    EXPECT_NO_THROW(validate_transition(p));
    p.at({0, 0}) = 0.6;
    EXPECT_THROW(validate_transition(p), ArgumentError);
    DenseTensor neg({2, 2}, {1.5, 1.0, -0.5, 0.0});
    EXPECT_THROW(validate_transition(neg), ArgumentError);
}

TEST(GenerateAggregatable, RankOneIsProductForm)
{
    const MarkovModel m = generate_aggregatable(2, 3, {1, 1}, 7);
    expect_stochastic(m.transition, 1e-12);
    for (std::size_t j = 0; j < 2; ++j) {
        const double q = m.transition.at({0, 0, j});
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(m.transition.at({a, b, j}), q, 1e-15);
    }
}

TEST(GenerateAggregatable, RanksBoundedAndStochastic)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const MarkovModel m = generate_aggregatable(5, 3, {2, 2}, seed);
        EXPECT_EQ(m.order, 2u);
        expect_stochastic(m.transition, 1e-12);
        const Ranks r = tt_ranks_of(m.transition, 1e-10).ranks;
        EXPECT_LE(r[0], 2u);
        EXPECT_LE(r[1], 2u);
    }
}

TEST(GenerateAggregatable, Deterministic)
{
    EXPECT_EQ(generate_aggregatable(4, 4, {2, 3, 2}, 9).transition, generate_aggregatable(4, 4, {2, 3, 2}, 9).transition);
    EXPECT_NE(generate_aggregatable(4, 4, {2, 3, 2}, 9).transition, generate_aggregatable(4, 4, {2, 3, 2}, 10).transition);
    EXPECT_THROW(generate_aggregatable(4, 3, {2}, 1), ArgumentError);
}

TEST(SampleTrajectory, FollowsForcedPath)
{
    const Trajectory t = sample_trajectory(cyclic_model(), 50, 3);
    ASSERT_EQ(t.states.size(), 50u);
    for (std::size_t i = 1; i < t.states.size(); ++i) EXPECT_EQ(t.states[i], (t.states[i - 1] + 1) % 3);
}

TEST(SampleTrajectory, FrequenciesMatchFibers)
{
    const MarkovModel m = generate_aggregatable(3, 2, {2}, 11);
    const std::size_t n = 1000000;
    const Trajectory t = sample_trajectory(m, n, 12);
    std::vector<double> from(3, 0.0);
    DenseTensor counts({3, 3});
    for (std::size_t i = 0; i + 1 < n; ++i) {
        counts.at({t.states[i], t.states[i + 1]}) += 1.0;
        from[t.states[i]] += 1.0;
    }
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            const double q = m.transition.at({a, b});
            const double freq = counts.at({a, b}) / from[a];
            EXPECT_LE(std::abs(freq - q), 3.0 * std::sqrt(q * (1 - q) / from[a]) + 1e-12) << a << "," << b;
        }
    }
}

TEST(SampleTrajectory, SeedDeterminismAndLengthCheck)
{
    const MarkovModel m = generate_aggregatable(4, 3, {2, 2}, 1);
    EXPECT_EQ(sample_trajectory(m, 100, 5).states, sample_trajectory(m, 100, 5).states);
    EXPECT_THROW(sample_trajectory(m, 1, 5), ArgumentError);
}

TEST(EmpiricalFromTrajectory, HandCountedRatios)
{
    // Pairs from 0: 0->0 twice, 0->1 twice. Pairs from 1: 1->1 twice, 1->0 three times.
    Trajectory t{{1, 1, 0, 0, 0, 1, 0, 1, 1, 0}};
    const DenseTensor e = empirical_from_trajectory(t, 2, 2);
    EXPECT_EQ(e.at({0, 0}), 0.5);
    EXPECT_EQ(e.at({0, 1}), 0.5);
    EXPECT_EQ(e.at({1, 0}), 3.0 / 5.0);
    EXPECT_EQ(e.at({1, 1}), 2.0 / 5.0);
    EXPECT_EQ(e, oracle::count_transitions(t.states, 2, 2));
}

TEST(EmpiricalFromTrajectory, EveryPrefixFollowedByFirstState)
{
    Trajectory t{{1, 0, 0, 0}};
    const DenseTensor e = empirical_from_trajectory(t, 2, 2);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_EQ(e.at({a, 0}), 1.0);
        EXPECT_EQ(e.at({a, 1}), 0.0);
    }
}

TEST(EmpiricalFromTrajectory, UnseenPrefixesAreUniform)
{
    Trajectory t{{0, 1, 2}};
    const DenseTensor e = empirical_from_trajectory(t, 4, 3);
    expect_stochastic(e, 1e-15);
    EXPECT_EQ(e.at({0, 1, 2}), 1.0);
    EXPECT_EQ(e.at({2, 2, 0}), 0.25);
    EXPECT_EQ(e.at({3, 1, 3}), 0.25);
}

TEST(EmpiricalFromTrajectory, MatchesCountingOracle)
{
    const MarkovModel m = generate_aggregatable(4, 3, {2, 2}, 2);
    const Trajectory t = sample_trajectory(m, 3000, 4);
    EXPECT_EQ(empirical_from_trajectory(t, 4, 3), oracle::count_transitions(t.states, 4, 3));
    Trajectory bad{{0, 5}};
    EXPECT_THROW(empirical_from_trajectory(bad, 4, 2), ArgumentError);
}

TEST(EmpiricalGenerative, PointMassesAreExact)
{
    EXPECT_EQ(empirical_generative(cyclic_model(), 7, 1), cyclic_model().transition);
}

TEST(EmpiricalGenerative, LawOfLargeNumbers)
{
    const MarkovModel m = generate_aggregatable(5, 3, {2, 2}, 3);
    const DenseTensor e = empirical_generative(m, 100000, 4);
    expect_stochastic(e, 1e-12);
    double worst = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) worst = std::max(worst, std::abs(e.data()[i] - m.transition.data()[i]));
    EXPECT_LE(worst, 0.02);
}

TEST(EmpiricalGenerative, MeanSquaredErrorMatchesMultinomialVariance)
{
    const MarkovModel m = generate_aggregatable(4, 3, {2, 2}, 5);
    const std::size_t n = 200;
    double expected = 0.0;
    for (double q : m.transition.data()) expected += q * (1 - q) / static_cast<double>(n);
    double observed = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const double dist = frob_distance(empirical_generative(m, n, static_cast<std::uint64_t>(s)), m.transition);
        observed += dist * dist / seeds;
    }
    EXPECT_NEAR(observed / expected, 1.0, 0.2);
}

TEST(SimplexProject, ForcedCases)
{
    EXPECT_EQ(simplex_project(std::vector<double>{2, 0}), (std::vector<double>{1, 0}));
    const std::vector<double> on = {0.25, 0.5, 0.25};
    const auto same = simplex_project(on);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(same[i], on[i], 1e-15);
    const std::vector<double> v = {0.2, 0.4, 0.9};
    const auto got = simplex_project(v);
    const auto want = oracle::simplex_active_set(v);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    EXPECT_THROW(simplex_project(std::vector<double>{}), ArgumentError);
    EXPECT_THROW(simplex_project(std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()}), NumericError);
}

TEST(SimplexProject, IdempotentAndNonExpansive)
{
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t p = 1 + rng.below(10);
        std::vector<double> a(p);
        std::vector<double> b(p);
        for (std::size_t i = 0; i < p; ++i) {
            a[i] = 2 * rng.normal();
            b[i] = 2 * rng.normal();
        }
        const auto pa = simplex_project(a);
        const auto pb = simplex_project(b);
        double sum = 0.0;
        for (double x : pa) {
            EXPECT_GE(x, 0.0);
            sum += x;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const auto ppa = simplex_project(pa);
        double in = 0.0;
        double out = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            EXPECT_NEAR(ppa[i], pa[i], 1e-14);
            in += (a[i] - b[i]) * (a[i] - b[i]);
            out += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        }
        EXPECT_LE(out, in * (1 + 1e-12) + 1e-24);
    }
}

TEST(EstimateTransition, LowRankStochasticIsAFixedPoint)
{
    const MarkovModel m = generate_aggregatable(6, 3, {2, 2}, 8);
    const TransitionEstimate est = estimate_transition(m.transition, {2, 2});
    EXPECT_LE(frob_distance(est.projected, m.transition), 1e-8);
}

TEST(EstimateTransition, ProjectionAtMostDoublesError)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const MarkovModel m = generate_aggregatable(6, 3, {2, 2}, seed);
        const DenseTensor emp = empirical_from_trajectory(sample_trajectory(m, 5000, seed + 100), 6, 3);
        const TransitionEstimate est = estimate_transition(emp, {2, 2});
        expect_stochastic(est.projected, 1e-12);
        EXPECT_LE(frob_distance(est.projected, m.transition), 2.0 * frob_distance(est.unprojected, m.transition) + 1e-12);
        EXPECT_EQ(est.diagnostics.iterations, 1);
    }
}

TEST(EstimateTransition, RejectsNonStochasticInput)
{
    DenseTensor bad({2, 2}, {1, 1, 1, 1});
    EXPECT_THROW(estimate_transition(bad, {1}), ArgumentError);
    EXPECT_THROW(estimate_transition(DenseTensor({2, 3}, {0.5, 0.5, 0.5, 0.5, 0, 0}), {1}), ArgumentError);
}
