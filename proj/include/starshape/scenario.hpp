#pragma once

// Finite scenario spaces, empirical distributions and quantile-curve
// arithmetic. Every quantity downstream (risk functionals, dominance
// orders, envelope constructions) reduces to exact piecewise operations
// on the objects defined here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace starshape {

/// Probability bookkeeping tolerance (weights are exact rationals or sums
/// thereof, so ulp-scale slack suffices).
inline constexpr double kWeightTol = 1e-12;

/// Relative tolerance under which two atom values are considered the same
/// outcome and merged.
inline constexpr double kMergeTol = 1e-12;

/// Comparison tolerance for derived quantities (quantiles, tail integrals,
/// functional values).
inline constexpr double kCurveTol = 1e-9;

namespace detail {

inline bool values_close(double a, double b) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= kMergeTol * scale;
}

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

/// A finite probability space: strictly positive scenario weights that sum
/// to one. Immutable after construction.
class ScenarioSpace {
public:
    explicit ScenarioSpace(std::vector<double> probabilities)
        : probs_(std::move(probabilities)) {
        detail::require(!probs_.empty(), "ScenarioSpace: no scenarios");
        double sum = 0.0;
        for (double p : probs_) {
            detail::require(std::isfinite(p) && p > 0.0,
                            "ScenarioSpace: probabilities must be finite and positive");
            sum += p;
        }
        detail::require(std::abs(sum - 1.0) <= 1e-9,
                        "ScenarioSpace: probabilities must sum to one");
    }

    static ScenarioSpace uniform(std::size_t n) {
        detail::require(n > 0, "ScenarioSpace: no scenarios");
        return ScenarioSpace(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double probability(std::size_t i) const { return probs_.at(i); }
    const std::vector<double>& probabilities() const noexcept { return probs_; }

private:
    std::vector<double> probs_;
};

/// A real-valued map on a scenario space. Values must be finite; the space
/// travels with the variable so that pointwise operations stay well-typed.
class RandomVariable {
public:
    RandomVariable(ScenarioSpace space, std::vector<double> values)
        : space_(std::move(space)), values_(std::move(values)) {
        detail::require(values_.size() == space_.size(),
                        "RandomVariable: value count must match scenario count");
        for (double v : values_)
            detail::require(std::isfinite(v), "RandomVariable: values must be finite");
    }

    static RandomVariable constant(const ScenarioSpace& space, double value) {
        return RandomVariable(space, std::vector<double>(space.size(), value));
    }

    const ScenarioSpace& space() const noexcept { return space_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    ScenarioSpace space_;
    std::vector<double> values_;
};

/// One support point of a discrete law.
struct Atom {
    double value;
    double weight;
};

/// Canonical discrete law: atoms sorted by strictly increasing value, all
/// weights positive, weights summing to one. Two random variables have the
/// same law exactly when their canonical forms agree, which is what makes
/// every functional in this library law-invariant by construction.
class EmpiricalDistribution {
public:
    /// Sorts, merges values that coincide within kMergeTol (relative), and
    /// validates the weight budget. Throws std::invalid_argument on empty
    /// input, non-finite values, non-positive weights, or a weight sum off
    /// by more than 1e-9.
    static EmpiricalDistribution from_atoms(std::vector<Atom> in) {
        detail::require(!in.empty(), "EmpiricalDistribution: no atoms");
        double sum = 0.0;
        for (const Atom& a : in) {
            detail::require(std::isfinite(a.value), "EmpiricalDistribution: values must be finite");
            detail::require(std::isfinite(a.weight) && a.weight > 0.0,
                            "EmpiricalDistribution: weights must be positive");
            sum += a.weight;
        }
        detail::require(std::abs(sum - 1.0) <= 1e-9,
                        "EmpiricalDistribution: weights must sum to one");
        std::sort(in.begin(), in.end(),
                  [](const Atom& a, const Atom& b) { return a.value < b.value; });
        std::vector<Atom> merged;
        merged.reserve(in.size());
        for (const Atom& a : in) {
            if (!merged.empty() && detail::values_close(merged.back().value, a.value))
                merged.back().weight += a.weight;
            else
                merged.push_back(a);
        }
        return EmpiricalDistribution(std::move(merged));
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    double min_value() const noexcept { return atoms_.front().value; }
    double max_value() const noexcept { return atoms_.back().value; }

    double mean() const noexcept {
        double m = 0.0;
        for (const Atom& a : atoms_) m += a.value * a.weight;
        return m;
    }

    /// True when the law is the unit mass at zero (up to value merging).
    bool is_zero() const noexcept {
        return atoms_.size() == 1 && detail::values_close(atoms_.front().value, 0.0);
    }

    /// Debug form: one "value,weight" line per atom, ascending.
    std::string to_text() const {
        std::ostringstream out;
        for (const Atom& a : atoms_)
            out << detail::format_value(a.value) << ',' << detail::format_value(a.weight) << '\n';
        return out.str();
    }

private:
    explicit EmpiricalDistribution(std::vector<Atom> canonical) : atoms_(std::move(canonical)) {}
    std::vector<Atom> atoms_;
};

/// Collapse a random variable to its law.
inline EmpiricalDistribution to_distribution(const RandomVariable& rv) {
    std::vector<Atom> atoms;
    atoms.reserve(rv.size());
    for (std::size_t i = 0; i < rv.size(); ++i)
        atoms.push_back({rv.values()[i], rv.space().probabilities()[i]});
    return EmpiricalDistribution::from_atoms(std::move(atoms));
}

/**
 * Left-continuous quantile function of a discrete law as a step curve.
 *
 * With atoms x_1 < ... < x_k and cumulative weights c_0 = 0 < c_1 < ... <
 * c_k = 1, the curve takes the value x_j on the interval (c_{j-1}, c_j].
 * value_at(0) returns x_1 (the essential infimum) and value_at(1) returns
 * x_k (the essential supremum), so the whole closed interval [0, 1] is
 * covered by the usual lower-quantile convention.
 */
class QuantileCurve {
public:
    explicit QuantileCurve(const EmpiricalDistribution& d) {
        cum_.reserve(d.size());
        levels_.reserve(d.size());
        double c = 0.0;
        for (const Atom& a : d.atoms()) {
            c += a.weight;
            cum_.push_back(std::min(c, 1.0));
            levels_.push_back(a.value);
        }
        cum_.back() = 1.0;
    }

    double value_at(double beta) const {
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::domain_error("QuantileCurve: level outside [0,1]");
        if (beta <= 0.0) return levels_.front();
        if (beta >= 1.0) return levels_.back();
        auto it = std::lower_bound(cum_.begin(), cum_.end(), beta);
        std::size_t j = static_cast<std::size_t>(it - cum_.begin());
        if (j >= levels_.size()) j = levels_.size() - 1;
        return levels_[j];
    }

    /// Cumulative weights c_1..c_k; the last entry is exactly 1.
    const std::vector<double>& cum() const noexcept { return cum_; }
    /// Atom values x_1..x_k aligned with cum().
    const std::vector<double>& levels() const noexcept { return levels_; }

private:
    std::vector<double> cum_;
    std::vector<double> levels_;
};

/**
 * Upper tail integral of the quantile function,
 *
 *     G(beta) = integral of the quantile curve over (beta, 1].
 *
 * G is piecewise linear and concave with G(1) = 0 and G(0) = E[X]; on the
 * segment above c_{j-1} the slope is -x_j. Node values are accumulated
 * from the top so every breakpoint value is a plain sum of atom
 * contributions. Expected shortfall at level beta < 1 is
 * G(beta) / (1 - beta).
 */
class IntegratedQuantileCurve {
public:
    explicit IntegratedQuantileCurve(const EmpiricalDistribution& d) {
        QuantileCurve q(d);
        const std::vector<double>& cum = q.cum();
        levels_ = q.levels();
        const std::size_t k = levels_.size();
        breaks_.resize(k + 1);
        nodes_.assign(k + 1, 0.0);
        breaks_[0] = 0.0;
        for (std::size_t j = 0; j < k; ++j) breaks_[j + 1] = cum[j];
        for (std::size_t j = k; j-- > 0;)
            nodes_[j] = nodes_[j + 1] + levels_[j] * (breaks_[j + 1] - breaks_[j]);
    }

    double value_at(double beta) const {
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::domain_error("IntegratedQuantileCurve: level outside [0,1]");
        if (beta >= 1.0) return 0.0;
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), beta);
        std::size_t j = static_cast<std::size_t>(it - breaks_.begin());
        j = (j == 0) ? 0 : j - 1;
        if (j >= levels_.size()) j = levels_.size() - 1;
        return nodes_[j + 1] + levels_[j] * (breaks_[j + 1] - beta);
    }

    /// Breakpoints 0 = b_0 < b_1 < ... < b_k = 1.
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    /// Node values G(b_0)..G(b_k); nodes_.front() is the mean, back() is 0.
    const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
    std::vector<double> breaks_;
    std::vector<double> nodes_;
    std::vector<double> levels_;
};

/// Lower quantile at level beta. var_at(d, 0) is the essential infimum and
/// var_at(d, 1) the essential supremum.
inline double var_at(const EmpiricalDistribution& d, double beta) {
    return QuantileCurve(d).value_at(beta);
}

inline IntegratedQuantileCurve integrated_quantile(const EmpiricalDistribution& d) {
    return IntegratedQuantileCurve(d);
}

/// Expected shortfall at level beta: the mean of the upper (1-beta) tail of
/// the quantile curve, with es_at(d, 0) = E[X] and es_at(d, 1) = max atom.
inline double es_at(const EmpiricalDistribution& d, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::domain_error("es_at: level outside [0,1]");
    if (beta >= 1.0) return d.max_value();
    return IntegratedQuantileCurve(d).value_at(beta) / (1.0 - beta);
}

/// Integral over (0,1] of the product of the two quantile curves, computed
/// segment by segment on the union refinement of the breakpoints. Exact for
/// step curves, which is what makes it usable as a dual pairing.
inline double quantile_inner(const EmpiricalDistribution& x, const EmpiricalDistribution& y) {
    QuantileCurve qx(x), qy(y);
    const std::vector<double>& cx = qx.cum();
    const std::vector<double>& cy = qy.cum();
    std::size_t i = 0, j = 0;
    double prev = 0.0, total = 0.0;
    while (i < cx.size() && j < cy.size()) {
        const double next = std::min(cx[i], cy[j]);
        total += qx.levels()[i] * qy.levels()[j] * (next - prev);
        prev = next;
        if (cx[i] == next) ++i;
        if (j < cy.size() && cy[j] == next) ++j;
    }
    return total;
}

/// Positive affine change of units, scale * X + shift. Negative scale is
/// rejected: it reverses the outcome order and none of the identities
/// preserved here survive it.
inline RandomVariable transform(const RandomVariable& rv, double scale, double shift) {
    if (!(std::isfinite(scale) && scale >= 0.0))
        throw std::domain_error("transform: scale must be finite and nonnegative");
    detail::require(std::isfinite(shift), "transform: shift must be finite");
    std::vector<double> out(rv.size());
    for (std::size_t i = 0; i < rv.size(); ++i) out[i] = scale * rv.values()[i] + shift;
    return RandomVariable(rv.space(), std::move(out));
}

/// Law of alpha * X for alpha >= 0. The degenerate alpha = 0 collapses to
/// the unit mass at zero.
inline EmpiricalDistribution scale_law(const EmpiricalDistribution& d, double alpha) {
    if (!(std::isfinite(alpha) && alpha >= 0.0))
        throw std::domain_error("scale_law: scale must be finite and nonnegative");
    if (alpha == 0.0) return EmpiricalDistribution::from_atoms({{0.0, 1.0}});
    std::vector<Atom> atoms = d.atoms();
    for (Atom& a : atoms) a.value = alpha * a.value;
    return EmpiricalDistribution::from_atoms(std::move(atoms));
}

/// Law of alpha * X + c for alpha >= 0.
inline EmpiricalDistribution affine_law(const EmpiricalDistribution& d, double alpha, double c) {
    if (!(std::isfinite(alpha) && alpha >= 0.0))
        throw std::domain_error("affine_law: scale must be finite and nonnegative");
    detail::require(std::isfinite(c), "affine_law: shift must be finite");
    std::vector<Atom> atoms = d.atoms();
    for (Atom& a : atoms) a.value = alpha * a.value + c;
    return EmpiricalDistribution::from_atoms(std::move(atoms));
}

/// Merged cumulative-weight grid of two laws: sorted, deduplicated, final
/// entry exactly 1. Step curves of both laws are constant between
/// consecutive entries, so any curve comparison is exact on this grid.
inline std::vector<double> union_breakpoints(const EmpiricalDistribution& x,
                                             const EmpiricalDistribution& y) {
    std::vector<double> merged;
    merged.reserve(x.size() + y.size());
    const QuantileCurve qx(x), qy(y);
    const std::vector<double>& cx = qx.cum();
    const std::vector<double>& cy = qy.cum();
    std::merge(cx.begin(), cx.end(), cy.begin(), cy.end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

}  // namespace starshape
