#pragma once

// Randomized property checks for risk functionals: axiom verification on
// seeded inputs with reproducible per-trial streams, plus the generators
// used to manufacture those inputs. Dominated pairs produced here are
// re-verified through the dominance module before they are used; a
// generator that fails its own soundness check aborts the trial instead of
// recording a spurious property failure.

#include <cstdint>
#include <functional>
#include <random>
#include <set>

#include "dominance.hpp"
#include "envelopes.hpp"
#include "measures.hpp"

namespace starshape {

/// One recorded counterexample: the per-trial seed that reproduces it, a
/// compact input summary, both sides of the violated relation, and the
/// signed amount by which it failed.
struct PropertyFailure {
    std::uint64_t seed = 0;
    std::string input;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

/// Outcome of a property run. `pass` is true exactly when no failures were
/// recorded; aborted trials (generator soundness misses) are counted
/// separately and never count as failures.
struct PropertyReport {
    std::string property;
    std::string spec;
    int trials = 0;
    std::uint64_t seed = 0;
    bool pass = true;
    int generator_aborts = 0;
    std::vector<PropertyFailure> failures;
};

/// Functional under test: anything mapping a random variable to a value in
/// the extended half-line.
using Evaluator = std::function<EvalResult(const RandomVariable&)>;

/// Comparison slack for functional values: absolute plus relative 1e-9.
inline double prop_tol(double a, double b) {
    return 1e-9 + 1e-9 * std::max(std::abs(a), std::abs(b));
}

/// Apply an arbitrary scenario-wise map (used by test hooks that need
/// transformations outside the nonnegative affine family).
template <typename F>
RandomVariable pointwise_map(const RandomVariable& rv, F&& f) {
    std::vector<double> out(rv.size());
    for (std::size_t i = 0; i < rv.size(); ++i) out[i] = f(rv.values()[i]);
    return RandomVariable(rv.space(), std::move(out));
}

namespace gen {

/// Uniform draw in [0, 1) from the top 53 bits; keeps streams identical
/// across standard library implementations.
inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return a + (b - a) * u01(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

/// Exact rational weights: an integer composition of a common denominator
/// at most 120, so cumulative weights are correctly rounded rationals.
inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t n) {
    const std::size_t denom = uniform_index(rng, n, 120);
    std::set<std::size_t> cuts;
    while (cuts.size() < n - 1) cuts.insert(uniform_index(rng, 1, denom - 1));
    std::vector<double> probs;
    probs.reserve(n);
    std::size_t prev = 0;
    for (std::size_t cut : cuts) {
        probs.push_back(static_cast<double>(cut - prev) / static_cast<double>(denom));
        prev = cut;
    }
    probs.push_back(static_cast<double>(denom - prev) / static_cast<double>(denom));
    return probs;
}

/// Mixture of a bounded uniform body and a two-sided heavy tail truncated
/// at +-1e3, to exercise both regular and extreme magnitudes.
inline double random_value(std::mt19937_64& rng) {
    if (u01(rng) < 0.7) return uniform(rng, -10.0, 10.0);
    double u = u01(rng);
    if (u < 1e-12) u = 1e-12;
    const double magnitude = std::min(1e3, std::pow(u, -2.0 / 3.0));
    return (u01(rng) < 0.5 ? -1.0 : 1.0) * magnitude;
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = random_value(rng);
    return out;
}

/// Random variable with 2..12 scenarios, exact rational weights, value
/// mixture as above.
inline RandomVariable random_variable(std::mt19937_64& rng) {
    const std::size_t n = uniform_index(rng, 2, 12);
    return RandomVariable(ScenarioSpace(random_probabilities(rng, n)), random_values(rng, n));
}

inline std::vector<double> random_deltas(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& d : out) d = u01(rng) < 0.3 ? 0.0 : uniform(rng, 0.0, 2.0);
    return out;
}

/// Random chain of mean-preserving contractions and (optionally) pointwise
/// reductions; the result is dominated by the input in second order, and in
/// convex order when reductions are disabled.
inline RandomVariable dominated_copy(std::mt19937_64& rng, const RandomVariable& rv,
                                     bool allow_reduce) {
    RandomVariable out = rv;
    const std::size_t steps = uniform_index(rng, 1, 3);
    for (std::size_t s = 0; s < steps; ++s) {
        if (!allow_reduce || u01(rng) < 0.6) {
            const std::size_t i = uniform_index(rng, 0, out.size() - 1);
            std::size_t j = uniform_index(rng, 0, out.size() - 2);
            if (j >= i) ++j;
            out = mps_contract(out, i, j);
        } else {
            out = pointwise_reduce(out, random_deltas(rng, out.size()));
        }
    }
    return out;
}

}  // namespace gen

namespace detail {

struct TrialResult {
    enum class Status { pass, fail, abort };
    Status status = Status::pass;
    std::string input;
    double lhs = 0.0;
    double rhs = 0.0;
};

inline TrialResult trial_pass() { return {}; }

inline TrialResult trial_fail(std::string input, double lhs, double rhs) {
    return {TrialResult::Status::fail, std::move(input), lhs, rhs};
}

inline TrialResult trial_abort() {
    return {TrialResult::Status::abort, {}, 0.0, 0.0};
}

/// Checks lhs <= rhs under the harness tolerance, treating an infinite rhs
/// as trivially satisfied.
inline TrialResult check_le(const std::string& input, const EvalResult& lhs, double rhs,
                            bool rhs_finite) {
    if (!rhs_finite) return trial_pass();
    if (!lhs.finite || lhs.value > rhs + prop_tol(lhs.value, rhs))
        return trial_fail(input, lhs.value, rhs);
    return trial_pass();
}

inline TrialResult check_eq(const std::string& input, const EvalResult& lhs, double rhs,
                            bool rhs_finite) {
    if (!rhs_finite) return !lhs.finite ? trial_pass() : trial_fail(input, lhs.value, rhs);
    if (!lhs.finite || std::abs(lhs.value - rhs) > prop_tol(lhs.value, rhs))
        return trial_fail(input, lhs.value, rhs);
    return trial_pass();
}

template <typename Trial>
PropertyReport run_property(std::string property, std::string spec, int trials,
                            std::uint64_t seed, Trial&& trial) {
    require(trials > 0, "property run: trial count must be positive");
    PropertyReport report;
    report.property = std::move(property);
    report.spec = std::move(spec);
    report.trials = trials;
    report.seed = seed;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed ^ static_cast<std::uint64_t>(t);
        std::mt19937_64 rng(trial_seed);
        const TrialResult r = trial(rng);
        switch (r.status) {
            case TrialResult::Status::pass: break;
            case TrialResult::Status::abort: ++report.generator_aborts; break;
            case TrialResult::Status::fail:
                report.failures.push_back(
                    {trial_seed, r.input, r.lhs, r.rhs, r.lhs - r.rhs});
                break;
        }
    }
    report.pass = report.failures.empty();
    return report;
}

inline std::string summarize(const RandomVariable& rv) {
    return "atoms=" + std::to_string(to_distribution(rv).size()) +
           " scenarios=" + std::to_string(rv.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Axiom checks. Each comes in an Evaluator flavor (for arbitrary hooks) and
// a MeasureSpec flavor that names the report after the canonical spec text.

inline PropertyReport check_star_shaped(const std::string& name, const Evaluator& eval,
                                        int trials, std::uint64_t seed) {
    return detail::run_property("star-shaped", name, trials, seed, [&](std::mt19937_64& rng) {
        const RandomVariable rv = gen::random_variable(rng);
        const double lambda = gen::u01(rng);
        const EvalResult at_x = eval(rv);
        const EvalResult at_zero = eval(RandomVariable::constant(rv.space(), 0.0));
        const EvalResult lhs = eval(transform(rv, lambda, 0.0));
        const bool rhs_finite = at_x.finite && at_zero.finite;
        const double rhs = lambda * at_x.value + (1.0 - lambda) * at_zero.value;
        const std::string input =
            detail::summarize(rv) + " lambda=" + detail::format_value(lambda);
        return detail::check_le(input, lhs, rhs, rhs_finite);
    });
}

inline PropertyReport check_positive_homogeneity(const std::string& name, const Evaluator& eval,
                                                 int trials, std::uint64_t seed) {
    return detail::run_property(
        "positive-homogeneity", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable rv = gen::random_variable(rng);
            const double lambda = gen::uniform(rng, 0.0, 4.0);
            const EvalResult at_x = eval(rv);
            const EvalResult lhs = eval(transform(rv, lambda, 0.0));
            const std::string input =
                detail::summarize(rv) + " lambda=" + detail::format_value(lambda);
            return detail::check_eq(input, lhs, lambda * at_x.value, at_x.finite);
        });
}

inline PropertyReport check_cash_additive(const std::string& name, const Evaluator& eval,
                                          int trials, std::uint64_t seed) {
    return detail::run_property(
        "cash-additive", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable rv = gen::random_variable(rng);
            const double m = gen::uniform(rng, -5.0, 5.0);
            const EvalResult at_x = eval(rv);
            const EvalResult lhs = eval(transform(rv, 1.0, m));
            const std::string input = detail::summarize(rv) + " m=" + detail::format_value(m);
            return detail::check_eq(input, lhs, at_x.value + m, at_x.finite);
        });
}

inline PropertyReport check_cash_subadditive(const std::string& name, const Evaluator& eval,
                                             int trials, std::uint64_t seed) {
    return detail::run_property(
        "cash-subadditive", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable rv = gen::random_variable(rng);
            const double m = gen::uniform(rng, 0.0, 5.0);
            const EvalResult at_x = eval(rv);
            const EvalResult lhs = eval(transform(rv, 1.0, m));
            const std::string input = detail::summarize(rv) + " m=" + detail::format_value(m);
            return detail::check_le(input, lhs, at_x.value + m, at_x.finite);
        });
}

inline PropertyReport check_monotone(const std::string& name, const Evaluator& eval, int trials,
                                     std::uint64_t seed) {
    return detail::run_property("monotone", name, trials, seed, [&](std::mt19937_64& rng) {
        const RandomVariable rv = gen::random_variable(rng);
        const RandomVariable reduced = pointwise_reduce(rv, gen::random_deltas(rng, rv.size()));
        const EvalResult lhs = eval(reduced);
        const EvalResult rhs = eval(rv);
        return detail::check_le(detail::summarize(rv) + " reduced", lhs, rhs.value, rhs.finite);
    });
}

inline PropertyReport check_convex(const std::string& name, const Evaluator& eval, int trials,
                                   std::uint64_t seed) {
    return detail::run_property("convex", name, trials, seed, [&](std::mt19937_64& rng) {
        const RandomVariable a = gen::random_variable(rng);
        const RandomVariable b(a.space(), gen::random_values(rng, a.size()));
        const double lambda = gen::u01(rng);
        std::vector<double> mixed(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            mixed[i] = lambda * a.values()[i] + (1.0 - lambda) * b.values()[i];
        const EvalResult lhs = eval(RandomVariable(a.space(), std::move(mixed)));
        const EvalResult at_a = eval(a);
        const EvalResult at_b = eval(b);
        const bool rhs_finite = at_a.finite && at_b.finite;
        const double rhs = lambda * at_a.value + (1.0 - lambda) * at_b.value;
        const std::string input =
            detail::summarize(a) + " lambda=" + detail::format_value(lambda);
        return detail::check_le(input, lhs, rhs, rhs_finite);
    });
}

inline PropertyReport check_ssd_consistent(const std::string& name, const Evaluator& eval,
                                           int trials, std::uint64_t seed) {
    return detail::run_property(
        "ssd-consistent", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable upper = gen::random_variable(rng);
            const RandomVariable lower = gen::dominated_copy(rng, upper, true);
            if (!ssd_compare(to_distribution(upper), to_distribution(lower)).holds)
                return detail::trial_abort();
            const EvalResult lhs = eval(lower);
            const EvalResult rhs = eval(upper);
            return detail::check_le(detail::summarize(upper) + " dominated-chain", lhs,
                                    rhs.value, rhs.finite);
        });
}

inline PropertyReport check_csd_consistent(const std::string& name, const Evaluator& eval,
                                           int trials, std::uint64_t seed) {
    return detail::run_property(
        "csd-consistent", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable upper = gen::random_variable(rng);
            const RandomVariable lower = gen::dominated_copy(rng, upper, false);
            if (!csd_compare(to_distribution(upper), to_distribution(lower)).holds)
                return detail::trial_abort();
            const EvalResult lhs = eval(lower);
            const EvalResult rhs = eval(upper);
            return detail::check_le(detail::summarize(upper) + " contraction-chain", lhs,
                                    rhs.value, rhs.finite);
        });
}

inline PropertyReport check_law_invariant(const std::string& name, const Evaluator& eval,
                                          int trials, std::uint64_t seed) {
    return detail::run_property(
        "law-invariant", name, trials, seed, [&](std::mt19937_64& rng) {
            const RandomVariable rv = gen::random_variable(rng);
            // Same law on a finer space: split every scenario into exact
            // halves (so the regrouped weights are bitwise identical), then
            // shuffle the pieces.
            std::vector<std::pair<double, double>> pieces;
            pieces.reserve(rv.size() * 2);
            for (std::size_t i = 0; i < rv.size(); ++i) {
                const double half = 0.5 * rv.space().probabilities()[i];
                pieces.emplace_back(half, rv.values()[i]);
                pieces.emplace_back(half, rv.values()[i]);
            }
            for (std::size_t i = pieces.size(); i-- > 1;)
                std::swap(pieces[i], pieces[gen::uniform_index(rng, 0, i)]);
            std::vector<double> probs, values;
            for (const auto& [p, v] : pieces) {
                probs.push_back(p);
                values.push_back(v);
            }
            const EvalResult lhs = eval(RandomVariable(ScenarioSpace(probs), values));
            const EvalResult rhs = eval(rv);
            return detail::check_eq(detail::summarize(rv) + " relabeled", lhs, rhs.value,
                                    rhs.finite);
        });
}

namespace detail {

inline Evaluator spec_evaluator(const MeasureSpec& spec) {
    return [spec](const RandomVariable& rv) { return evaluate(spec, rv); };
}

}  // namespace detail

inline PropertyReport check_star_shaped(const MeasureSpec& spec, int trials, std::uint64_t seed) {
    return check_star_shaped(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_positive_homogeneity(const MeasureSpec& spec, int trials,
                                                 std::uint64_t seed) {
    return check_positive_homogeneity(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_cash_additive(const MeasureSpec& spec, int trials,
                                          std::uint64_t seed) {
    return check_cash_additive(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_cash_subadditive(const MeasureSpec& spec, int trials,
                                             std::uint64_t seed) {
    return check_cash_subadditive(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_monotone(const MeasureSpec& spec, int trials, std::uint64_t seed) {
    return check_monotone(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_convex(const MeasureSpec& spec, int trials, std::uint64_t seed) {
    return check_convex(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_ssd_consistent(const MeasureSpec& spec, int trials,
                                           std::uint64_t seed) {
    return check_ssd_consistent(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_csd_consistent(const MeasureSpec& spec, int trials,
                                           std::uint64_t seed) {
    return check_csd_consistent(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}
inline PropertyReport check_law_invariant(const MeasureSpec& spec, int trials,
                                          std::uint64_t seed) {
    return check_law_invariant(spec.to_text(), detail::spec_evaluator(spec), trials, seed);
}

/// Stable plain-text rendering, used to assert byte-for-byte determinism of
/// repeated runs.
inline std::string to_text(const PropertyReport& report) {
    std::ostringstream out;
    out << report.property << '|' << report.spec << '|' << report.trials << '|' << report.seed
        << '|' << (report.pass ? "pass" : "fail") << '|' << report.generator_aborts << '\n';
    for (const PropertyFailure& f : report.failures)
        out << f.seed << '|' << f.input << '|' << detail::format_value(f.lhs) << '|'
            << detail::format_value(f.rhs) << '|' << detail::format_value(f.gap) << '\n';
    return out.str();
}

}  // namespace starshape
