#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "starshape/dominance.hpp"
#include "starshape/property.hpp"

using namespace starshape;
using Catch::Approx;

namespace {

EmpiricalDistribution uniform_dist(std::vector<double> values) {
    const std::size_t n = values.size();
    return to_distribution(RandomVariable(ScenarioSpace::uniform(n), std::move(values)));
}

// Independent oracles working in value space (stop-loss transforms and raw
// CDFs) rather than quantile space, with the same comparison slack.

double stop_loss(const EmpiricalDistribution& d, double t) {
    double out = 0.0;
    for (const Atom& a : d.atoms()) out += a.weight * std::max(a.value - t, 0.0);
    return out;
}

double cdf_at(const EmpiricalDistribution& d, double t) {
    double out = 0.0;
    for (const Atom& a : d.atoms())
        if (a.value <= t) out += a.weight;
    return out;
}

std::vector<double> union_values(const EmpiricalDistribution& x,
                                 const EmpiricalDistribution& y) {
    std::vector<double> out;
    for (const Atom& a : x.atoms()) out.push_back(a.value);
    for (const Atom& a : y.atoms()) out.push_back(a.value);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool fsd_oracle(const EmpiricalDistribution& x, const EmpiricalDistribution& y) {
    for (double t : union_values(x, y))
        if (cdf_at(x, t) > cdf_at(y, t) + kWeightTol) return false;
    return true;
}

bool ssd_oracle(const EmpiricalDistribution& x, const EmpiricalDistribution& y) {
    if (x.mean() < y.mean() - kCurveTol) return false;
    for (double t : union_values(x, y))
        if (stop_loss(x, t) < stop_loss(y, t) - kCurveTol) return false;
    return true;
}

bool csd_oracle(const EmpiricalDistribution& x, const EmpiricalDistribution& y) {
    return std::abs(x.mean() - y.mean()) <= kCurveTol && ssd_oracle(x, y);
}

}  // namespace

TEST_CASE("first-order dominance on shifted laws", "[dominance]") {
    const EmpiricalDistribution hi = uniform_dist({2, 3});
    const EmpiricalDistribution lo = uniform_dist({1, 2});
    REQUIRE(fsd_compare(hi, lo).holds);
    REQUIRE(ssd_compare(hi, lo).holds);
    REQUIRE_FALSE(csd_compare(hi, lo).holds);  // means differ

    const DominanceVerdict back = fsd_compare(lo, hi);
    REQUIRE_FALSE(back.holds);
    REQUIRE(back.witness.has_value());
    REQUIRE(back.witness->lhs < back.witness->rhs);
}

TEST_CASE("spread dominates its contraction in second order only", "[dominance]") {
    const EmpiricalDistribution wide = uniform_dist({1, 4});
    const EmpiricalDistribution narrow = uniform_dist({2, 3});
    REQUIRE_FALSE(fsd_compare(wide, narrow).holds);
    REQUIRE(ssd_compare(wide, narrow).holds);
    REQUIRE(csd_compare(wide, narrow).holds);  // equal means

    const DominanceVerdict back = ssd_compare(narrow, wide);
    REQUIRE_FALSE(back.holds);
    REQUIRE(back.witness.has_value());

    const DominanceVerdict fsd_back = fsd_compare(wide, narrow);
    REQUIRE(fsd_back.witness->beta == Approx(0.5));
    REQUIRE(fsd_back.witness->lhs == Approx(1.0));
    REQUIRE(fsd_back.witness->rhs == Approx(2.0));
}

TEST_CASE("convex-order comparison rejects unequal means up front", "[dominance]") {
    const EmpiricalDistribution x = uniform_dist({0, 10});
    const EmpiricalDistribution y = uniform_dist({0, 1});
    const DominanceVerdict v = csd_compare(x, y);
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.witness->beta == 0.0);  // mean mismatch reported at the base level
}

TEST_CASE("equality in law ignores scenario labels and splits", "[dominance]") {
    const RandomVariable a(ScenarioSpace::uniform(2), {1.0, 2.0});
    const RandomVariable b(ScenarioSpace({0.25, 0.25, 0.5}), {1.0, 1.0, 2.0});
    REQUIRE(equal_in_law(to_distribution(a), to_distribution(b)));
    const RandomVariable c(ScenarioSpace({0.3, 0.7}), {1.0, 2.0});
    REQUIRE_FALSE(equal_in_law(to_distribution(a), to_distribution(c)));
}

TEST_CASE("scale matching recovers the proportionality constant", "[dominance]") {
    const EmpiricalDistribution z = uniform_dist({-1, 2, 4});
    const EmpiricalDistribution x = scale_law(z, 0.5);
    const auto alpha = law_match_scale(x, z, 1.0);
    REQUIRE(alpha.has_value());
    REQUIRE(*alpha == Approx(0.5).margin(1e-12));

    // Out of range under the unit cap, found under the loose cap.
    const EmpiricalDistribution big = scale_law(z, 1.5);
    REQUIRE_FALSE(law_match_scale(big, z, 1.0).has_value());
    const auto loose = law_match_scale(big, z, std::numeric_limits<double>::infinity());
    REQUIRE(loose.has_value());
    REQUIRE(*loose == Approx(1.5).margin(1e-12));

    // Degenerate target matches alpha = 0.
    const EmpiricalDistribution zero = EmpiricalDistribution::from_atoms({{0.0, 1.0}});
    const auto at_zero = law_match_scale(zero, z, 1.0);
    REQUIRE(at_zero.has_value());
    REQUIRE(*at_zero == 0.0);

    // Not proportional in law.
    const EmpiricalDistribution other = uniform_dist({-1, 2, 5});
    REQUIRE_FALSE(law_match_scale(other, z, 1.0).has_value());
}

TEST_CASE("affine matching recovers scale and shift", "[dominance]") {
    const EmpiricalDistribution z = uniform_dist({1, 2});
    const EmpiricalDistribution x = uniform_dist({1.5, 2});
    const auto m = law_match_affine(x, z);
    REQUIRE(m.has_value());
    REQUIRE(m->alpha == Approx(0.5).margin(1e-12));
    REQUIRE(m->shift == Approx(1.0).margin(1e-12));

    // Point-mass target: zero scale, shift equal to the constant.
    const EmpiricalDistribution c = EmpiricalDistribution::from_atoms({{7.0, 1.0}});
    const auto mc = law_match_affine(c, z);
    REQUIRE(mc.has_value());
    REQUIRE(mc->alpha == 0.0);
    REQUIRE(mc->shift == Approx(7.0));

    REQUIRE_FALSE(law_match_affine(uniform_dist({0, 1, 2}), z).has_value());
}

TEST_CASE("mean-preserving contraction is dominated in convex order", "[dominance]") {
    const RandomVariable rv(ScenarioSpace::uniform(4), {1, 2, 3, 10});
    const RandomVariable contracted = mps_contract(rv, 0, 3);
    REQUIRE(to_distribution(contracted).mean() == Approx(to_distribution(rv).mean()));
    REQUIRE(csd_compare(to_distribution(rv), to_distribution(contracted)).holds);
    REQUIRE_THROWS_AS(mps_contract(rv, 1, 1), std::invalid_argument);
}

TEST_CASE("pointwise reduction is dominated in first order", "[dominance]") {
    const RandomVariable rv(ScenarioSpace::uniform(3), {1, 5, 9});
    const RandomVariable reduced = pointwise_reduce(rv, {0.0, 2.0, 1.0});
    REQUIRE(reduced.values() == std::vector<double>{1, 3, 8});
    REQUIRE(fsd_compare(to_distribution(rv), to_distribution(reduced)).holds);
    REQUIRE_THROWS_AS(pointwise_reduce(rv, {-1.0, 0.0, 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(pointwise_reduce(rv, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("dominance decisions agree with value-space oracles", "[dominance]") {
    int fsd_holds = 0, ssd_holds = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::mt19937_64 rng(9000 + static_cast<std::uint64_t>(trial));
        const RandomVariable a = gen::random_variable(rng);
        RandomVariable b = gen::random_variable(rng);
        switch (trial % 4) {
            case 0: break;  // unrelated pair
            case 1: b = pointwise_reduce(a, gen::random_deltas(rng, a.size())); break;
            case 2: b = gen::dominated_copy(rng, a, false); break;
            case 3: b = transform(a, 1.0, -gen::uniform(rng, 0.0, 3.0)); break;
        }
        const EmpiricalDistribution dx = to_distribution(a);
        const EmpiricalDistribution dy = to_distribution(b);
        REQUIRE(fsd_compare(dx, dy).holds == fsd_oracle(dx, dy));
        REQUIRE(ssd_compare(dx, dy).holds == ssd_oracle(dx, dy));
        REQUIRE(csd_compare(dx, dy).holds == csd_oracle(dx, dy));
        REQUIRE(ssd_compare(dy, dx).holds == ssd_oracle(dy, dx));
        fsd_holds += fsd_compare(dx, dy).holds;
        ssd_holds += ssd_compare(dx, dy).holds;
    }
    // The pair mix exercises both outcomes of each order.
    REQUIRE(fsd_holds > 20);
    REQUIRE(fsd_holds < 180);
    REQUIRE(ssd_holds > fsd_holds);  // first order implies second order
}

TEST_CASE("first order implies second order on dominated pairs", "[dominance]") {
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(777 + static_cast<std::uint64_t>(trial));
        const RandomVariable a = gen::random_variable(rng);
        const RandomVariable b = pointwise_reduce(a, gen::random_deltas(rng, a.size()));
        const EmpiricalDistribution dx = to_distribution(a);
        const EmpiricalDistribution dy = to_distribution(b);
        REQUIRE(fsd_compare(dx, dy).holds);
        REQUIRE(ssd_compare(dx, dy).holds);
    }
}
