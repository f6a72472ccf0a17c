#pragma once

// Stochastic dominance orders on discrete laws, equality-in-law probes, and
// the two elementary transformations (mean-preserving contraction, pointwise
// reduction) used to manufacture dominated pairs.
//
// All comparisons are curve comparisons on the union breakpoint grid, where
// step and piecewise-linear curves are evaluated exactly, plus the boundary
// check at level 1 that the tail-integral form does not see.

#include <optional>

#include "scenario.hpp"

namespace starshape {

/// First violation found by a dominance check: the breakpoint and the two
/// curve values that failed there.
struct DominanceWitness {
    double beta;
    double lhs;
    double rhs;
};

/// Outcome of a dominance comparison. `witness` is engaged exactly when
/// `holds` is false. Violations within kCurveTol are treated as holding.
struct DominanceVerdict {
    bool holds = false;
    std::optional<DominanceWitness> witness;
};

/// First-order dominance: the quantile curve of x sits above the quantile
/// curve of y at every union breakpoint.
inline DominanceVerdict fsd_compare(const EmpiricalDistribution& x,
                                    const EmpiricalDistribution& y) {
    QuantileCurve qx(x), qy(y);
    double last = -1.0;
    for (double beta : union_breakpoints(x, y)) {
        // Cumulative sums of the two laws can land ulps apart at a shared
        // breakpoint. Probing inside such a sliver would read the two step
        // curves on different sides of the same jump, so near-duplicate
        // grid points collapse onto the first one.
        if (beta - last <= kWeightTol) continue;
        last = beta;
        const double lhs = qx.value_at(beta);
        const double rhs = qy.value_at(beta);
        if (lhs < rhs - kCurveTol) return {false, DominanceWitness{beta, lhs, rhs}};
    }
    return {true, std::nullopt};
}

/// Second-order (increasing convex) dominance: the upper tail integral of x
/// dominates that of y on [0, 1), plus the essential-supremum comparison
/// that is the level-1 limit of the shortfall curve.
inline DominanceVerdict ssd_compare(const EmpiricalDistribution& x,
                                    const EmpiricalDistribution& y) {
    IntegratedQuantileCurve gx(x), gy(y);
    const double m_lhs = gx.value_at(0.0);
    const double m_rhs = gy.value_at(0.0);
    if (m_lhs < m_rhs - kCurveTol) return {false, DominanceWitness{0.0, m_lhs, m_rhs}};
    for (double beta : union_breakpoints(x, y)) {
        if (beta >= 1.0) break;
        const double lhs = gx.value_at(beta);
        const double rhs = gy.value_at(beta);
        if (lhs < rhs - kCurveTol) return {false, DominanceWitness{beta, lhs, rhs}};
    }
    const double top_lhs = x.max_value();
    const double top_rhs = y.max_value();
    if (top_lhs < top_rhs - kCurveTol) return {false, DominanceWitness{1.0, top_lhs, top_rhs}};
    return {true, std::nullopt};
}

/// Convex-order dominance: second-order dominance with equal means. A mean
/// mismatch is reported as a witness at breakpoint 0.
inline DominanceVerdict csd_compare(const EmpiricalDistribution& x,
                                    const EmpiricalDistribution& y) {
    const double mx = x.mean();
    const double my = y.mean();
    if (std::abs(mx - my) > kCurveTol) return {false, DominanceWitness{0.0, mx, my}};
    return ssd_compare(x, y);
}

/// True when the canonical atom lists coincide: same count, values within
/// the merge tolerance, weights within kWeightTol.
inline bool equal_in_law(const EmpiricalDistribution& x, const EmpiricalDistribution& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Atom& a = x.atoms()[i];
        const Atom& b = y.atoms()[i];
        if (!detail::values_close(a.value, b.value)) return false;
        if (std::abs(a.weight - b.weight) > kWeightTol) return false;
    }
    return true;
}

/// Finds alpha in [0, alpha_max] with x equal in law to alpha * z, if one
/// exists. The candidate ratio is read off the tail-integral node with the
/// largest |G_z| (the most stable denominator) and then verified literally,
/// so a returned alpha is always a certified match. Degenerate case: when z
/// is the unit mass at zero, only x identically zero matches, with alpha 0.
inline std::optional<double> law_match_scale(const EmpiricalDistribution& x,
                                             const EmpiricalDistribution& z,
                                             double alpha_max) {
    if (!(alpha_max >= 0.0)) throw std::domain_error("law_match_scale: negative alpha bound");
    if (z.is_zero()) return x.is_zero() ? std::optional<double>(0.0) : std::nullopt;
    if (x.is_zero()) return 0.0;

    IntegratedQuantileCurve gz(z);
    double best_beta = 0.0, best_abs = -1.0;
    const std::vector<double>& breaks = gz.breakpoints();
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
        const double g = gz.nodes()[j];
        if (std::abs(g) > best_abs) {
            best_abs = std::abs(g);
            best_beta = breaks[j];
        }
    }
    if (best_abs <= kWeightTol) return std::nullopt;

    IntegratedQuantileCurve gx(x);
    double alpha = gx.value_at(best_beta) / gz.value_at(best_beta);
    if (alpha < -kCurveTol || alpha > alpha_max + kCurveTol) return std::nullopt;
    alpha = std::min(std::max(alpha, 0.0), alpha_max);
    if (equal_in_law(x, scale_law(z, alpha))) return alpha;
    return std::nullopt;
}

/// Result of an affine law match: x equal in law to alpha * z + shift.
struct AffineMatch {
    double alpha;
    double shift;
};

/// Finds (alpha, shift) with alpha in [0, 1] and x equal in law to
/// alpha * z + shift. A point mass x matches any z with alpha = 0 and the
/// shift equal to its value. Otherwise alpha is pinned by the spread ratio
/// (max - mean), the shift by the means, and the pair is verified literally.
inline std::optional<AffineMatch> law_match_affine(const EmpiricalDistribution& x,
                                                   const EmpiricalDistribution& z) {
    if (x.size() == 1) return AffineMatch{0.0, x.atoms().front().value};
    if (z.size() == 1) return std::nullopt;

    const double spread_x = x.max_value() - x.mean();
    const double spread_z = z.max_value() - z.mean();
    double alpha = spread_x / spread_z;
    if (alpha < -kCurveTol || alpha > 1.0 + kCurveTol) return std::nullopt;
    alpha = std::min(std::max(alpha, 0.0), 1.0);
    const double shift = x.mean() - alpha * z.mean();
    if (equal_in_law(x, affine_law(z, alpha, shift))) return AffineMatch{alpha, shift};
    return std::nullopt;
}

/// Replaces outcomes i and j by their probability-weighted average. The
/// result is dominated by the input in the convex order and keeps the mean.
inline RandomVariable mps_contract(const RandomVariable& rv, std::size_t i, std::size_t j) {
    if (i >= rv.size() || j >= rv.size())
        throw std::out_of_range("mps_contract: scenario index out of range");
    detail::require(i != j, "mps_contract: indices must differ");
    const double pi = rv.space().probabilities()[i];
    const double pj = rv.space().probabilities()[j];
    const double avg = (pi * rv.values()[i] + pj * rv.values()[j]) / (pi + pj);
    std::vector<double> out = rv.values();
    out[i] = avg;
    out[j] = avg;
    return RandomVariable(rv.space(), std::move(out));
}

/// Subtracts a nonnegative amount from each outcome. The result is below
/// the input pointwise, hence dominated in first order.
inline RandomVariable pointwise_reduce(const RandomVariable& rv,
                                       const std::vector<double>& deltas) {
    detail::require(deltas.size() == rv.size(),
                    "pointwise_reduce: delta count must match scenario count");
    std::vector<double> out = rv.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        detail::require(std::isfinite(deltas[i]) && deltas[i] >= 0.0,
                        "pointwise_reduce: deltas must be nonnegative");
        out[i] -= deltas[i];
    }
    return RandomVariable(rv.space(), std::move(out));
}

}  // namespace starshape
