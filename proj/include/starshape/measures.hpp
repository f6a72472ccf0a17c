#pragma once

// Risk functional specifications as a small expression tree, their
// evaluation on finite random variables, the worst-case-discount quantile
// functional with its brute-force cross-check, a syntactic axiom profile,
// and the text grammar used by the command line.

#include <charconv>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scenario.hpp"

namespace starshape {

/// Value in the extended half-line R plus {+infinity}. `value` is finite
/// exactly when `finite` is true; infinite results carry +inf in `value`.
struct EvalResult {
    double value = std::numeric_limits<double>::infinity();
    bool finite = false;

    static EvalResult of(double v) {
        if (!std::isfinite(v)) throw std::domain_error("EvalResult: non-finite value");
        return {v, true};
    }
    static EvalResult infinity() { return {std::numeric_limits<double>::infinity(), false}; }
};

/**
 * Specification of a risk functional. Leaves are quantile/shortfall
 * functionals, constants, the entropic functional and the worst-case
 * discounted quantile; interior nodes take pointwise minima or maxima of
 * their children. Instances are immutable value objects built through the
 * named factories, which validate parameters.
 */
class MeasureSpec {
public:
    enum class Kind {
        Var,
        Es,
        Mean,
        EssSup,
        Const,
        Entropic,
        EsMixture,
        MinFamily,
        MaxFamily,
        RobustVar
    };

    static MeasureSpec var(double beta) {
        check_level(beta, "var");
        MeasureSpec s(Kind::Var);
        s.a_ = beta;
        return s;
    }

    static MeasureSpec es(double beta) {
        check_level(beta, "es");
        MeasureSpec s(Kind::Es);
        s.a_ = beta;
        return s;
    }

    static MeasureSpec mean() { return MeasureSpec(Kind::Mean); }
    static MeasureSpec ess_sup() { return MeasureSpec(Kind::EssSup); }

    static MeasureSpec constant(double v) {
        detail::require(std::isfinite(v), "const: value must be finite");
        MeasureSpec s(Kind::Const);
        s.a_ = v;
        return s;
    }

    static MeasureSpec entropic(double theta) {
        detail::require(std::isfinite(theta) && theta > 0.0,
                        "entropic: aversion parameter must be positive");
        MeasureSpec s(Kind::Entropic);
        s.a_ = theta;
        return s;
    }

    /// Weighted shortfall mixture. Weights must be positive and sum to one
    /// within kWeightTol; levels live in (0, 1].
    static MeasureSpec es_mixture(std::vector<std::pair<double, double>> weighted_levels) {
        detail::require(!weighted_levels.empty(), "mix: empty mixture");
        double sum = 0.0;
        for (const auto& [w, s] : weighted_levels) {
            detail::require(std::isfinite(w) && w > 0.0, "mix: weights must be positive");
            detail::require(std::isfinite(s) && s > 0.0 && s <= 1.0,
                            "mix: levels must lie in (0,1]");
            sum += w;
        }
        detail::require(std::abs(sum - 1.0) <= 1e-9, "mix: weights must sum to one");
        MeasureSpec out(Kind::EsMixture);
        out.mixture_ = std::move(weighted_levels);
        return out;
    }

    static MeasureSpec min_of(std::vector<MeasureSpec> children) {
        detail::require(!children.empty(), "min: empty family");
        MeasureSpec s(Kind::MinFamily);
        s.children_ = std::move(children);
        return s;
    }

    static MeasureSpec max_of(std::vector<MeasureSpec> children) {
        detail::require(!children.empty(), "max: empty family");
        MeasureSpec s(Kind::MaxFamily);
        s.children_ = std::move(children);
        return s;
    }

    /// Worst-case quantile over scenario-wise discount factors confined to
    /// [d_lower, d_upper], 0 <= d_lower <= d_upper.
    static MeasureSpec robust_var(double beta, double d_lower, double d_upper) {
        check_level(beta, "robvar");
        detail::require(std::isfinite(d_lower) && std::isfinite(d_upper),
                        "robvar: discount bounds must be finite");
        detail::require(d_lower >= 0.0, "robvar: lower discount bound must be nonnegative");
        detail::require(d_lower <= d_upper, "robvar: discount bounds out of order");
        MeasureSpec s(Kind::RobustVar);
        s.a_ = beta;
        s.b_ = d_lower;
        s.c_ = d_upper;
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    double level() const noexcept { return a_; }
    double constant_value() const noexcept { return a_; }
    double theta() const noexcept { return a_; }
    double robust_beta() const noexcept { return a_; }
    double discount_lower() const noexcept { return b_; }
    double discount_upper() const noexcept { return c_; }
    const std::vector<std::pair<double, double>>& mixture() const noexcept { return mixture_; }
    const std::vector<MeasureSpec>& children() const noexcept { return children_; }

    /// Canonical text form; parse_measure(to_text()) reproduces the spec.
    std::string to_text() const {
        switch (kind_) {
            case Kind::Var: return "var:" + detail::format_value(a_);
            case Kind::Es: return "es:" + detail::format_value(a_);
            case Kind::Mean: return "mean";
            case Kind::EssSup: return "esssup";
            case Kind::Const: return "const:" + detail::format_value(a_);
            case Kind::Entropic: return "entropic:" + detail::format_value(a_);
            case Kind::EsMixture: {
                std::string out = "mix:(";
                for (std::size_t i = 0; i < mixture_.size(); ++i) {
                    if (i) out += ',';
                    out += detail::format_value(mixture_[i].first);
                    out += "@es:";
                    out += detail::format_value(mixture_[i].second);
                }
                return out + ")";
            }
            case Kind::MinFamily:
            case Kind::MaxFamily: {
                std::string out = kind_ == Kind::MinFamily ? "min(" : "max(";
                for (std::size_t i = 0; i < children_.size(); ++i) {
                    if (i) out += ',';
                    out += children_[i].to_text();
                }
                return out + ")";
            }
            case Kind::RobustVar:
                return "robvar:" + detail::format_value(a_) + ":" + detail::format_value(b_) +
                       ":" + detail::format_value(c_);
        }
        return {};
    }

private:
    explicit MeasureSpec(Kind k) : kind_(k) {}

    static void check_level(double beta, const char* who) {
        if (!(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument(std::string(who) + ": level must lie in [0,1]");
    }

    Kind kind_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
    std::vector<std::pair<double, double>> mixture_;
    std::vector<MeasureSpec> children_;
};

/// Worst-case quantile when every scenario outcome may be rescaled by an
/// adversarial factor in [d_lower, d_upper]. The quantile is monotone in
/// the outcome vector, so the scenario-wise envelope d_upper on gains and
/// d_lower on losses attains the supremum; the closed form is exact.
inline double robust_var(const RandomVariable& rv, double beta, double d_lower, double d_upper) {
    MeasureSpec::robust_var(beta, d_lower, d_upper);  // parameter validation
    std::vector<double> worst(rv.size());
    for (std::size_t i = 0; i < rv.size(); ++i) {
        const double v = rv.values()[i];
        worst[i] = v >= 0.0 ? d_upper * v : d_lower * v;
    }
    return var_at(to_distribution(RandomVariable(rv.space(), std::move(worst))), beta);
}

/// Brute-force counterpart of robust_var: enumerates every corner of the
/// discount box (the supremum of a quantile over a box is attained at a
/// corner). Exponential in the scenario count; refuses more than 20.
inline double robust_var_oracle(const RandomVariable& rv, double beta, double d_lower,
                                double d_upper) {
    MeasureSpec::robust_var(beta, d_lower, d_upper);
    if (rv.size() > 20) throw std::length_error("robust_var_oracle: too many scenarios");
    const std::uint32_t corners = 1u << rv.size();
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> w(rv.size());
    for (std::uint32_t mask = 0; mask < corners; ++mask) {
        for (std::size_t i = 0; i < rv.size(); ++i) {
            const double d = (mask >> i) & 1u ? d_upper : d_lower;
            w[i] = d * rv.values()[i];
        }
        best = std::max(best, var_at(to_distribution(RandomVariable(rv.space(), w)), beta));
    }
    return best;
}

/// Evaluates a specification on a random variable. Leaf functionals are
/// finite on finite inputs; +infinity can only enter through family nodes
/// whose children all (min) or any (max) evaluate to +infinity, which no
/// builtin leaf produces.
inline EvalResult evaluate(const MeasureSpec& spec, const RandomVariable& rv) {
    using Kind = MeasureSpec::Kind;
    switch (spec.kind()) {
        case Kind::Var: return EvalResult::of(var_at(to_distribution(rv), spec.level()));
        case Kind::Es: return EvalResult::of(es_at(to_distribution(rv), spec.level()));
        case Kind::Mean: return EvalResult::of(to_distribution(rv).mean());
        case Kind::EssSup: return EvalResult::of(to_distribution(rv).max_value());
        case Kind::Const: return EvalResult::of(spec.constant_value());
        case Kind::Entropic: {
            const double theta = spec.theta();
            const EmpiricalDistribution d = to_distribution(rv);
            double shift = -std::numeric_limits<double>::infinity();
            for (const Atom& a : d.atoms()) {
                const double e = theta * a.value;
                if (!std::isfinite(e)) throw std::domain_error("entropic: exponent overflow");
                shift = std::max(shift, e);
            }
            double sum = 0.0;
            for (const Atom& a : d.atoms()) sum += a.weight * std::exp(theta * a.value - shift);
            return EvalResult::of((shift + std::log(sum)) / theta);
        }
        case Kind::EsMixture: {
            const EmpiricalDistribution d = to_distribution(rv);
            double total = 0.0;
            for (const auto& [w, s] : spec.mixture()) total += w * es_at(d, s);
            return EvalResult::of(total);
        }
        case Kind::MinFamily: {
            bool any_finite = false;
            double best = std::numeric_limits<double>::infinity();
            for (const MeasureSpec& child : spec.children()) {
                const EvalResult r = evaluate(child, rv);
                if (r.finite) {
                    any_finite = true;
                    best = std::min(best, r.value);
                }
            }
            return any_finite ? EvalResult::of(best) : EvalResult::infinity();
        }
        case Kind::MaxFamily: {
            double best = -std::numeric_limits<double>::infinity();
            for (const MeasureSpec& child : spec.children()) {
                const EvalResult r = evaluate(child, rv);
                if (!r.finite) return EvalResult::infinity();
                best = std::max(best, r.value);
            }
            return EvalResult::of(best);
        }
        case Kind::RobustVar:
            return EvalResult::of(
                robust_var(rv, spec.robust_beta(), spec.discount_lower(), spec.discount_upper()));
    }
    throw std::logic_error("evaluate: unknown specification kind");
}

// ---------------------------------------------------------------------------
// Axiom profile

enum class Axiom {
    LawInvariant,
    Monotone,
    PositivelyHomogeneous,
    CashAdditive,
    CashSubadditive,
    Convex,
    Sublinear,
    StarShaped,
    SsdConsistent,
    CsdConsistent
};

inline std::string to_string(Axiom a) {
    switch (a) {
        case Axiom::LawInvariant: return "law-invariant";
        case Axiom::Monotone: return "monotone";
        case Axiom::PositivelyHomogeneous: return "positively-homogeneous";
        case Axiom::CashAdditive: return "cash-additive";
        case Axiom::CashSubadditive: return "cash-subadditive";
        case Axiom::Convex: return "convex";
        case Axiom::Sublinear: return "sublinear";
        case Axiom::StarShaped: return "star-shaped";
        case Axiom::SsdConsistent: return "ssd-consistent";
        case Axiom::CsdConsistent: return "csd-consistent";
    }
    return {};
}

/**
 * Axioms derivable from the shape of the specification alone, closed under
 * the standard implications (cash additivity gives cash subadditivity,
 * positive homogeneity or convexity give star-shapedness, convexity plus
 * positive homogeneity gives sublinearity, second-order consistency gives
 * convex-order consistency). Families keep exactly the axioms their
 * combinator preserves: pointwise maxima keep convexity and
 * star-shapedness; pointwise minima keep star-shapedness only when all
 * children agree at zero, and never keep convexity.
 *
 * The profile is a sound under-approximation: an axiom listed here holds,
 * an axiom missing may still hold for special parameter values.
 */
inline std::set<Axiom> measure_axiom_profile(const MeasureSpec& spec) {
    using Kind = MeasureSpec::Kind;
    using A = Axiom;
    std::set<A> out;
    auto add = [&out](std::initializer_list<A> axioms) {
        for (A a : axioms) out.insert(a);
    };

    switch (spec.kind()) {
        case Kind::Var:
            add({A::LawInvariant, A::Monotone, A::PositivelyHomogeneous, A::CashAdditive});
            break;
        case Kind::Es:
        case Kind::Mean:
        case Kind::EssSup:
        case Kind::EsMixture:
            add({A::LawInvariant, A::Monotone, A::PositivelyHomogeneous, A::CashAdditive,
                 A::Convex, A::SsdConsistent});
            break;
        case Kind::Const:
            add({A::LawInvariant, A::Monotone, A::Convex, A::CashSubadditive, A::SsdConsistent});
            if (spec.constant_value() == 0.0) out.insert(A::PositivelyHomogeneous);
            break;
        case Kind::Entropic:
            add({A::LawInvariant, A::Monotone, A::CashAdditive, A::Convex, A::SsdConsistent});
            break;
        case Kind::RobustVar:
            add({A::LawInvariant, A::Monotone, A::PositivelyHomogeneous});
            break;
        case Kind::MinFamily:
        case Kind::MaxFamily: {
            const bool is_max = spec.kind() == Kind::MaxFamily;
            std::set<A> preserved = {A::LawInvariant, A::Monotone, A::PositivelyHomogeneous,
                                     A::CashAdditive, A::CashSubadditive, A::SsdConsistent,
                                     A::CsdConsistent};
            if (is_max) {
                preserved.insert(A::Convex);
                preserved.insert(A::StarShaped);
            }
            bool first = true;
            bool all_star = true;
            bool zeros_agree = true;
            double zero_value = 0.0;
            const ScenarioSpace trivial = ScenarioSpace::uniform(1);
            const RandomVariable zero = RandomVariable::constant(trivial, 0.0);
            for (const MeasureSpec& child : spec.children()) {
                std::set<A> profile = measure_axiom_profile(child);
                all_star = all_star && profile.count(A::StarShaped) > 0;
                const EvalResult at_zero = evaluate(child, zero);
                if (first) {
                    zero_value = at_zero.value;
                    for (A a : profile)
                        if (preserved.count(a)) out.insert(a);
                    first = false;
                } else {
                    zeros_agree = zeros_agree &&
                                  std::abs(at_zero.value - zero_value) <= kWeightTol;
                    for (auto it = out.begin(); it != out.end();) {
                        if (!profile.count(*it)) it = out.erase(it);
                        else ++it;
                    }
                }
            }
            if (all_star && (is_max || zeros_agree)) out.insert(A::StarShaped);
            break;
        }
    }

    // Implication closure.
    if (out.count(A::CashAdditive)) out.insert(A::CashSubadditive);
    if (out.count(A::PositivelyHomogeneous)) out.insert(A::StarShaped);
    if (out.count(A::Convex)) out.insert(A::StarShaped);
    if (out.count(A::Convex) && out.count(A::PositivelyHomogeneous)) out.insert(A::Sublinear);
    if (out.count(A::SsdConsistent)) out.insert(A::CsdConsistent);
    return out;
}

// ---------------------------------------------------------------------------
// Text grammar
//
//   spec := atom | "min(" spec {"," spec} ")" | "max(" spec {"," spec} ")"
//   atom := "var:" P | "es:" P | "mean" | "esssup" | "const:" R
//         | "entropic:" Rpos | "mix:(" W "@es:" P {"," W "@es:" P} ")"
//         | "robvar:" P ":" R ":" R
//
// Whitespace between tokens is ignored. Mixture weights are normalized.

/// Raised on malformed specification text. `offset` is the byte position in
/// the original input; `expected` names the token class that was required.
struct MeasureParseError : std::runtime_error {
    std::size_t offset;
    std::string expected;

    MeasureParseError(std::size_t off, std::string exp)
        : std::runtime_error("measure parse error at byte " + std::to_string(off) +
                             ": expected " + exp),
          offset(off),
          expected(std::move(exp)) {}
};

namespace detail {

class MeasureParser {
public:
    explicit MeasureParser(std::string_view src) : src_(src) {}

    MeasureSpec parse() {
        MeasureSpec out = parse_spec();
        skip_ws();
        if (pos_ != src_.size()) fail("end of input");
        return out;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(std::string expected) const {
        throw MeasureParseError(pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                src_[pos_] == '\r'))
            ++pos_;
    }

    void expect_char(char c) {
        skip_ws();
        if (pos_ >= src_.size() || src_[pos_] != c) fail(std::string("'") + c + "'");
        ++pos_;
    }

    bool try_char(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string read_ident() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] >= 'a' && src_[pos_] <= 'z') ++pos_;
        if (pos_ == start) fail("measure name");
        return std::string(src_.substr(start, pos_ - start));
    }

    double read_number(const char* what) {
        skip_ws();
        double value = 0.0;
        const char* begin = src_.data() + pos_;
        const char* end = src_.data() + src_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin) fail(what);
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    double read_level() {
        skip_ws();
        const std::size_t at = pos_;
        const double p = read_number("probability level");
        if (!(p >= 0.0 && p <= 1.0)) throw MeasureParseError(at, "probability level in [0,1]");
        return p;
    }

    MeasureSpec parse_spec() {
        skip_ws();
        const std::size_t at = pos_;
        const std::string name = read_ident();
        if (name == "min" || name == "max") {
            expect_char('(');
            std::vector<MeasureSpec> children;
            children.push_back(parse_spec());
            while (try_char(',')) children.push_back(parse_spec());
            expect_char(')');
            return name == "min" ? MeasureSpec::min_of(std::move(children))
                                 : MeasureSpec::max_of(std::move(children));
        }
        if (name == "mean") return MeasureSpec::mean();
        if (name == "esssup") return MeasureSpec::ess_sup();
        if (name == "var") {
            expect_char(':');
            return MeasureSpec::var(read_level());
        }
        if (name == "es") {
            expect_char(':');
            return MeasureSpec::es(read_level());
        }
        if (name == "const") {
            expect_char(':');
            return MeasureSpec::constant(read_number("constant value"));
        }
        if (name == "entropic") {
            expect_char(':');
            skip_ws();
            const std::size_t vat = pos_;
            const double theta = read_number("aversion parameter");
            if (!(theta > 0.0)) throw MeasureParseError(vat, "positive aversion parameter");
            return MeasureSpec::entropic(theta);
        }
        if (name == "mix") {
            expect_char(':');
            expect_char('(');
            std::vector<std::pair<double, double>> parts;
            do {
                skip_ws();
                const std::size_t wat = pos_;
                const double w = read_number("mixture weight");
                if (!(w > 0.0)) throw MeasureParseError(wat, "positive mixture weight");
                expect_char('@');
                skip_ws();
                const std::size_t eat = pos_;
                if (read_ident() != "es") throw MeasureParseError(eat, "'es'");
                expect_char(':');
                skip_ws();
                const std::size_t lat = pos_;
                const double s = read_level();
                if (!(s > 0.0)) throw MeasureParseError(lat, "level in (0,1]");
                parts.emplace_back(w, s);
            } while (try_char(','));
            expect_char(')');
            double total = 0.0;
            for (const auto& [w, s] : parts) total += w;
            for (auto& [w, s] : parts) w /= total;
            return MeasureSpec::es_mixture(std::move(parts));
        }
        if (name == "robvar") {
            expect_char(':');
            const double beta = read_level();
            expect_char(':');
            skip_ws();
            const std::size_t lat = pos_;
            const double lo = read_number("lower discount bound");
            if (!(lo >= 0.0)) throw MeasureParseError(lat, "nonnegative lower discount bound");
            expect_char(':');
            skip_ws();
            const std::size_t uat = pos_;
            const double hi = read_number("upper discount bound");
            if (!(hi >= lo)) throw MeasureParseError(uat, "upper discount bound >= lower");
            return MeasureSpec::robust_var(beta, lo, hi);
        }
        throw MeasureParseError(
            at, "one of var, es, mean, esssup, const, entropic, mix, robvar, min, max");
    }
};

}  // namespace detail

/// Parses the textual grammar above. Throws MeasureParseError with the byte
/// offset of the first offending token.
inline MeasureSpec parse_measure(std::string_view text) {
    return detail::MeasureParser(text).parse();
}

}  // namespace starshape
