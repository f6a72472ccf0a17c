#pragma once

// Envelope constructions over candidate families: scale envelopes under
// second-order and convex-order dominance, the cash-additive affine
// envelope as a two-variable linear program, the shortfall dual identity,
// and the representation checks that reassemble a risk functional as the
// minimum of its member envelopes.

#include <optional>

#include "dominance.hpp"
#include "measures.hpp"

namespace starshape {

/// Scaling regime for envelope searches: star-shaped functionals admit
/// scales in [0, 1], positively homogeneous ones any nonnegative scale.
enum class ScaleRegime { StarShaped, PositivelyHomogeneous };

inline double alpha_bound(ScaleRegime regime) {
    return regime == ScaleRegime::StarShaped ? 1.0
                                             : std::numeric_limits<double>::infinity();
}

/// One comparison anchor (z, rho(z)) inside a candidate family.
struct CandidateMember {
    RandomVariable z;
    double rho;
};

/// Finite family of anchors plus the family's value at the zero position.
/// Every member value must be finite.
struct CandidateFamily {
    std::vector<CandidateMember> members;
    double rho_zero = 0.0;
};

/// Feasible scale range {alpha : alpha * Z second-order dominates X},
/// intersected with [0, alpha_max]. Empty when `feasible` is false.
struct AlphaInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool feasible = false;
};

/// Outcome of a single envelope evaluation. `value` is +infinity when the
/// search is infeasible (finite = false); alpha and cash_shift are engaged
/// when the construction selects them. active_breakpoints lists the levels
/// whose constraints are tight at the optimum.
struct EnvelopeCertificate {
    double value = std::numeric_limits<double>::infinity();
    bool finite = false;
    std::optional<double> alpha;
    std::optional<double> cash_shift;
    std::optional<std::size_t> chosen_index;
    std::vector<double> active_breakpoints;
};

namespace detail {

struct ScaleConstraint {
    double beta;  // level, with 1.0 standing for the essential-supremum limit
    double a;     // coefficient of alpha (tail integral of z, or its max atom)
    double b;     // required right-hand side from x
};

/// Constraints equivalent to "alpha * Z second-order dominates X": the tail
/// integral comparison at every union breakpoint below 1 (including 0) and
/// the essential-supremum comparison standing in for the level-1 limit.
inline std::vector<ScaleConstraint> ssd_scale_constraints(const EmpiricalDistribution& x,
                                                          const EmpiricalDistribution& z) {
    IntegratedQuantileCurve gx(x), gz(z);
    std::vector<ScaleConstraint> out;
    out.push_back({0.0, gz.value_at(0.0), gx.value_at(0.0)});
    for (double beta : union_breakpoints(x, z)) {
        if (beta >= 1.0) break;
        out.push_back({beta, gz.value_at(beta), gx.value_at(beta)});
    }
    out.push_back({1.0, z.max_value(), x.max_value()});
    return out;
}

}  // namespace detail

/// Intersects the half-lines {alpha * a >= b} over all scale constraints
/// with [0, alpha_max]. A vanishing coefficient turns the constraint into
/// the sign requirement b <= 0 (within kCurveTol).
inline AlphaInterval ssd_scale_interval(const EmpiricalDistribution& x,
                                        const EmpiricalDistribution& z, double alpha_max) {
    if (!(alpha_max >= 0.0)) throw std::domain_error("ssd_scale_interval: negative bound");
    AlphaInterval iv;
    iv.lo = 0.0;
    iv.hi = alpha_max;
    bool ok = true;
    for (const auto& c : detail::ssd_scale_constraints(x, z)) {
        if (c.a > kWeightTol) {
            iv.lo = std::max(iv.lo, c.b / c.a);
        } else if (c.a < -kWeightTol) {
            iv.hi = std::min(iv.hi, c.b / c.a);
        } else {
            ok = ok && c.b <= kCurveTol;
        }
    }
    iv.feasible = ok && iv.lo <= iv.hi + 1e-12;
    if (iv.feasible) iv.lo = std::min(iv.lo, iv.hi);
    return iv;
}

/// Value assigned to X by the one-anchor functional built from (Z, rho(Z)):
/// alpha * rho(Z) + (1 - alpha) * rho(0) when X is equal in law to
/// alpha * Z for a scale admitted by the regime, +infinity otherwise.
inline EvalResult rho_z_eval(const RandomVariable& x, const RandomVariable& z, double rho_z,
                             double rho_zero, ScaleRegime regime) {
    detail::require(std::isfinite(rho_z) && std::isfinite(rho_zero),
                    "rho_z_eval: anchor values must be finite");
    const auto alpha =
        law_match_scale(to_distribution(x), to_distribution(z), alpha_bound(regime));
    if (!alpha) return EvalResult::infinity();
    return EvalResult::of(*alpha * rho_z + (1.0 - *alpha) * rho_zero);
}

namespace detail {

inline std::vector<double> tight_scale_breakpoints(const std::vector<ScaleConstraint>& cons,
                                                   double alpha) {
    std::vector<double> out;
    for (const auto& c : cons) {
        const double scale = std::max({1.0, std::abs(c.a), std::abs(c.b)});
        if (std::abs(alpha * c.a - c.b) <= kCurveTol * scale) out.push_back(c.beta);
    }
    return out;
}

}  // namespace detail

/// Smallest one-anchor value over laws that dominate X in second order:
/// minimizes alpha * rho(Z) + (1 - alpha) * rho(0) over the feasible scale
/// interval. Infeasible searches return an infinite certificate; in the
/// unbounded regime a negative slope with no upper constraint yields an
/// unbounded (-infinity) certificate.
inline EnvelopeCertificate tilde_rho_z(const RandomVariable& x, const RandomVariable& z,
                                       double rho_z, double rho_zero, ScaleRegime regime) {
    detail::require(std::isfinite(rho_z) && std::isfinite(rho_zero),
                    "tilde_rho_z: anchor values must be finite");
    const EmpiricalDistribution dx = to_distribution(x);
    const EmpiricalDistribution dz = to_distribution(z);
    const AlphaInterval iv = ssd_scale_interval(dx, dz, alpha_bound(regime));
    EnvelopeCertificate cert;
    if (!iv.feasible) return cert;
    const double slope = rho_z - rho_zero;
    const double alpha = slope >= 0.0 ? iv.lo : iv.hi;
    if (!std::isfinite(alpha)) {
        cert.value = -std::numeric_limits<double>::infinity();
        return cert;
    }
    cert.value = alpha * slope + rho_zero;
    cert.finite = true;
    cert.alpha = alpha;
    cert.active_breakpoints =
        detail::tight_scale_breakpoints(detail::ssd_scale_constraints(dx, dz), alpha);
    return cert;
}

/// Convex-order counterpart of tilde_rho_z: candidate scales must also
/// match the means, which pins alpha to mean(X)/mean(Z) unless Z is
/// centered, in which case X must be centered too and the whole feasible
/// interval remains in play.
inline EnvelopeCertificate csd_scale_envelope(const RandomVariable& x, const RandomVariable& z,
                                              double f_z, double f_zero) {
    detail::require(std::isfinite(f_z) && std::isfinite(f_zero),
                    "csd_scale_envelope: anchor values must be finite");
    const EmpiricalDistribution dx = to_distribution(x);
    const EmpiricalDistribution dz = to_distribution(z);
    const double mean_x = dx.mean();
    const double mean_z = dz.mean();
    const double tol_z =
        kMergeTol * std::max({1.0, std::abs(dz.min_value()), std::abs(dz.max_value())});

    EnvelopeCertificate cert;
    const auto cons = detail::ssd_scale_constraints(dx, dz);
    if (std::abs(mean_z) > tol_z) {
        double alpha = mean_x / mean_z;
        if (alpha < -kCurveTol || alpha > 1.0 + kCurveTol) return cert;
        alpha = std::min(std::max(alpha, 0.0), 1.0);
        for (const auto& c : cons) {
            const double scale = std::max({1.0, std::abs(c.a), std::abs(c.b)});
            if (alpha * c.a < c.b - kCurveTol * scale) return cert;
        }
        cert.value = alpha * (f_z - f_zero) + f_zero;
        cert.finite = true;
        cert.alpha = alpha;
        cert.active_breakpoints = detail::tight_scale_breakpoints(cons, alpha);
        return cert;
    }
    if (std::abs(mean_x) > kCurveTol) return cert;
    const AlphaInterval iv = ssd_scale_interval(dx, dz, 1.0);
    if (!iv.feasible) return cert;
    const double slope = f_z - f_zero;
    const double alpha = slope >= 0.0 ? iv.lo : iv.hi;
    cert.value = alpha * slope + f_zero;
    cert.finite = true;
    cert.alpha = alpha;
    cert.active_breakpoints = detail::tight_scale_breakpoints(cons, alpha);
    return cert;
}

/**
 * Cash-additive affine envelope:
 *
 *     minimize   alpha * rho(Z) + c
 *     subject to alpha * ES_beta(Z) + c >= ES_beta(X)  at every union
 *                breakpoint below 1 and at the essential-supremum limit,
 *                0 <= alpha <= 1, c free.
 *
 * The constraint surface c >= max_i(b_i - a_i * alpha) is convex piecewise
 * linear in alpha, so the optimum sits at alpha in {0, 1} or at a pairwise
 * intersection of constraint lines; all such vertices are enumerated. The
 * program is always feasible (push c up), hence the certificate is always
 * finite.
 */
inline EnvelopeCertificate affine_envelope_lp(const RandomVariable& x, const RandomVariable& z,
                                              double rho_z) {
    detail::require(std::isfinite(rho_z), "affine_envelope_lp: anchor value must be finite");
    const EmpiricalDistribution dx = to_distribution(x);
    const EmpiricalDistribution dz = to_distribution(z);

    std::vector<double> betas;
    betas.push_back(0.0);
    for (double beta : union_breakpoints(dx, dz))
        if (beta < 1.0) betas.push_back(beta);
    betas.push_back(1.0);

    std::vector<double> az(betas.size()), bx(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double beta = betas[i];
        az[i] = beta < 1.0 ? es_at(dz, beta) : dz.max_value();
        bx[i] = beta < 1.0 ? es_at(dx, beta) : dx.max_value();
    }

    const auto boundary = [&](double alpha) {
        double c = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < betas.size(); ++i) c = std::max(c, bx[i] - az[i] * alpha);
        return c;
    };

    std::vector<double> candidates = {0.0, 1.0};
    for (std::size_t i = 0; i < betas.size(); ++i)
        for (std::size_t j = i + 1; j < betas.size(); ++j) {
            const double da = az[i] - az[j];
            if (std::abs(da) <= kWeightTol) continue;
            const double alpha = (bx[i] - bx[j]) / da;
            if (alpha > 0.0 && alpha < 1.0) candidates.push_back(alpha);
        }

    double best_alpha = 0.0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (double alpha : candidates) {
        const double obj = rho_z * alpha + boundary(alpha);
        if (obj < best_obj - 1e-15 ||
            (std::abs(obj - best_obj) <= 1e-15 && alpha < best_alpha)) {
            best_obj = obj;
            best_alpha = alpha;
        }
    }

    EnvelopeCertificate cert;
    cert.value = best_obj;
    cert.finite = true;
    cert.alpha = best_alpha;
    const double c = boundary(best_alpha);
    cert.cash_shift = c;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double scale = std::max({1.0, std::abs(az[i]), std::abs(bx[i])});
        if (std::abs(az[i] * best_alpha + c - bx[i]) <= kCurveTol * scale)
            cert.active_breakpoints.push_back(betas[i]);
    }
    return cert;
}

/// Both sides of the shortfall dual identity at level beta in [0, 1): the
/// direct tail mean and the quantile pairing against the two-atom law
/// {0 w.p. beta, 1/(1-beta) w.p. 1-beta}. The two must agree to roundoff.
inline std::pair<double, double> kusuoka_es_identity(const EmpiricalDistribution& x,
                                                     double beta) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::domain_error("kusuoka_es_identity: level outside [0,1)");
    const double lhs = es_at(x, beta);
    EmpiricalDistribution dual =
        beta == 0.0
            ? EmpiricalDistribution::from_atoms({{1.0, 1.0}})
            : EmpiricalDistribution::from_atoms({{0.0, beta}, {1.0 / (1.0 - beta), 1.0 - beta}});
    return {lhs, quantile_inner(x, dual)};
}

// ---------------------------------------------------------------------------
// Representation reports

/// Envelope flavor used by minfamily_representation_check.
enum class EnvelopeMode { SsdScale, CsdScale, Affine };

/// Per-member row of a representation report.
struct RepresentationMember {
    std::size_t index = 0;
    bool in_gamma = false;
    std::optional<double> alpha;
    std::optional<double> cash_shift;
    double value = std::numeric_limits<double>::infinity();
    bool finite = false;
    std::vector<double> active_breakpoints;
};

/// Outcome of reassembling a functional value as the minimum of member
/// envelopes: the target value, every member's contribution, the attained
/// minimum with its argmin, and the pass verdict at `tolerance`.
struct RepresentationReport {
    double target = std::numeric_limits<double>::infinity();
    bool target_finite = false;
    std::vector<RepresentationMember> members;
    double min_value = std::numeric_limits<double>::infinity();
    bool min_finite = false;
    std::optional<std::size_t> argmin;
    bool pass = false;
    double tolerance = kCurveTol;
};

namespace detail {

inline void finalize_min(RepresentationReport& report) {
    for (const RepresentationMember& m : report.members) {
        if (!m.finite) continue;
        if (!report.min_finite || m.value < report.min_value) {
            report.min_value = m.value;
            report.min_finite = true;
            report.argmin = m.index;
        }
    }
}

}  // namespace detail

/// Checks that rho(X) equals the minimum of per-member envelopes and that
/// no member undercuts it: every member value must stay above rho_x within
/// tolerance, and the minimum must land on rho_x within tolerance.
inline RepresentationReport minfamily_representation_check(const RandomVariable& x,
                                                           const CandidateFamily& fam,
                                                           double rho_x, ScaleRegime regime,
                                                           EnvelopeMode mode) {
    detail::require(!fam.members.empty(), "representation check: empty family");
    detail::require(std::isfinite(rho_x), "representation check: target must be finite");
    if (mode == EnvelopeMode::Affine)
        detail::require(std::abs(fam.rho_zero) <= kCurveTol,
                        "representation check: affine mode requires a vanishing zero value");

    RepresentationReport report;
    report.target = rho_x;
    report.target_finite = true;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const CandidateMember& member = fam.members[i];
        EnvelopeCertificate cert;
        switch (mode) {
            case EnvelopeMode::SsdScale:
                cert = tilde_rho_z(x, member.z, member.rho, fam.rho_zero, regime);
                break;
            case EnvelopeMode::CsdScale:
                cert = csd_scale_envelope(x, member.z, member.rho, fam.rho_zero);
                break;
            case EnvelopeMode::Affine:
                cert = affine_envelope_lp(x, member.z, member.rho);
                break;
        }
        RepresentationMember row;
        row.index = i;
        row.in_gamma = cert.finite;
        row.alpha = cert.alpha;
        row.cash_shift = cert.cash_shift;
        row.value = cert.value;
        row.finite = cert.finite;
        row.active_breakpoints = std::move(cert.active_breakpoints);
        report.members.push_back(std::move(row));
    }
    detail::finalize_min(report);

    bool no_undercut = true;
    for (const RepresentationMember& m : report.members)
        no_undercut = no_undercut && (!m.finite || m.value >= rho_x - report.tolerance);
    report.pass = no_undercut && report.min_finite &&
                  std::abs(report.min_value - rho_x) <= report.tolerance;
    return report;
}

/**
 * Quantile-robustification representation. Members equal in law to a
 * regime-admissible multiple of X enter the comparison set; each
 * contributes
 *
 *     sup_beta (VaR_beta(X) - alpha * VaR_beta(Z)) + alpha * f(Z)
 *                                                 + (1 - alpha) * f(0),
 *
 * the supremum running over the union breakpoints including the
 * essential-supremum level. For a functional vanishing at zero the trailing
 * term drops out; passing f_zero keeps the identity exact for star-shaped
 * functionals with a nonzero base level. The minimum over the comparison
 * set must reproduce f(X); an infinite target requires an empty comparison
 * set.
 */
inline RepresentationReport var_robust_representation(const RandomVariable& x,
                                                      const CandidateFamily& fam, EvalResult f_x,
                                                      ScaleRegime regime, double f_zero = 0.0) {
    detail::require(!fam.members.empty(), "representation check: empty family");
    detail::require(std::isfinite(f_zero), "representation check: base value must be finite");
    const EmpiricalDistribution dx = to_distribution(x);
    QuantileCurve qx(dx);

    RepresentationReport report;
    report.target = f_x.value;
    report.target_finite = f_x.finite;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const CandidateMember& member = fam.members[i];
        const EmpiricalDistribution dz = to_distribution(member.z);
        RepresentationMember row;
        row.index = i;
        const auto alpha = law_match_scale(dx, dz, alpha_bound(regime));
        if (alpha) {
            QuantileCurve qz(dz);
            double sup = -std::numeric_limits<double>::infinity();
            std::vector<double> breaks = union_breakpoints(dx, dz);
            std::vector<double> gaps;
            gaps.reserve(breaks.size());
            for (double beta : breaks) {
                const double gap = qx.value_at(beta) - *alpha * qz.value_at(beta);
                gaps.push_back(gap);
                sup = std::max(sup, gap);
            }
            row.in_gamma = true;
            row.alpha = alpha;
            row.value = sup + *alpha * member.rho + (1.0 - *alpha) * f_zero;
            row.finite = true;
            for (std::size_t k = 0; k < breaks.size(); ++k)
                if (std::abs(gaps[k] - sup) <= kCurveTol) row.active_breakpoints.push_back(breaks[k]);
        }
        report.members.push_back(std::move(row));
    }
    detail::finalize_min(report);

    if (!f_x.finite) {
        report.pass = !report.min_finite;
        return report;
    }
    bool no_undercut = true;
    for (const RepresentationMember& m : report.members)
        no_undercut = no_undercut && (!m.finite || m.value >= f_x.value - report.tolerance);
    report.pass = no_undercut && report.min_finite &&
                  std::abs(report.min_value - f_x.value) <= report.tolerance;
    return report;
}

/// Largest scale for which some cash shift lifts alpha * Z above X in first
/// order. On bounded finite spaces the shift is unconstrained, so alpha = 1
/// is always admissible; the returned shift is the smallest one that works
/// at alpha = 1, i.e. the largest quantile gap.
inline std::pair<double, double> fsd_affine_alpha_sup(const EmpiricalDistribution& x,
                                                      const EmpiricalDistribution& z) {
    QuantileCurve qx(x), qz(z);
    double shift = -std::numeric_limits<double>::infinity();
    for (double beta : union_breakpoints(x, z))
        shift = std::max(shift, qx.value_at(beta) - qz.value_at(beta));
    return {1.0, shift};
}

/// Cash-additive quantile representation. Only members with rho(Z) <= tol
/// enter the comparison set; each contributes the constant
/// sup_beta (VaR_beta(X) - VaR_beta(Z)) obtained at the maximal scale 1.
/// The family is expected to contain the self-shifted anchor X - rho(X),
/// whose contribution reproduces rho(X) exactly.
inline RepresentationReport ca_var_representation(const RandomVariable& x,
                                                  const CandidateFamily& fam, double rho_x) {
    detail::require(!fam.members.empty(), "representation check: empty family");
    detail::require(std::isfinite(rho_x), "representation check: target must be finite");
    const EmpiricalDistribution dx = to_distribution(x);

    RepresentationReport report;
    report.target = rho_x;
    report.target_finite = true;
    for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const CandidateMember& member = fam.members[i];
        RepresentationMember row;
        row.index = i;
        if (member.rho <= report.tolerance) {
            const EmpiricalDistribution dz = to_distribution(member.z);
            const auto [alpha, shift] = fsd_affine_alpha_sup(dx, dz);
            row.in_gamma = true;
            row.alpha = alpha;
            row.cash_shift = shift;
            row.value = shift;
            row.finite = true;
            QuantileCurve qx(dx), qz(dz);
            for (double beta : union_breakpoints(dx, dz))
                if (std::abs(qx.value_at(beta) - qz.value_at(beta) - shift) <= kCurveTol)
                    row.active_breakpoints.push_back(beta);
        }
        report.members.push_back(std::move(row));
    }
    detail::finalize_min(report);

    bool no_undercut = true;
    for (const RepresentationMember& m : report.members)
        no_undercut = no_undercut && (!m.finite || m.value >= rho_x - report.tolerance);
    report.pass = no_undercut && report.min_finite &&
                  std::abs(report.min_value - rho_x) <= report.tolerance;
    return report;
}

}  // namespace starshape
