// starshape: risk functional evaluation, dominance tests, and envelope /
// representation verification on CSV scenario tables. JSON on stdout,
// diagnostics on stderr. Exit codes: 0 success, 1 usage or measure-spec
// error, 2 data error, 3 verification failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "starshape/csv.hpp"
#include "starshape/dominance.hpp"
#include "starshape/envelopes.hpp"
#include "starshape/measures.hpp"
#include "starshape/property.hpp"

namespace {

using nlohmann::ordered_json;
using namespace starshape;

// --- logging ---------------------------------------------------------------

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel g_log_level = LogLevel::warn;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
    }
    return "?";
}

void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) <= static_cast<int>(g_log_level))
        std::cerr << "[" << level_name(level) << "] " << msg << "\n";
}

void init_log_level() {
    const char* env = std::getenv("STARSHAPE_LOG");
    if (env == nullptr) return;
    const std::string v(env);
    if (v == "error") g_log_level = LogLevel::error;
    else if (v == "warn") g_log_level = LogLevel::warn;
    else if (v == "info") g_log_level = LogLevel::info;
    else if (v == "debug") g_log_level = LogLevel::debug;
    else log_line(LogLevel::warn, "unknown STARSHAPE_LOG value '" + v + "', using warn");
}

// --- deterministic JSON output ----------------------------------------------
// nlohmann's dump() prints shortest-round-trip floats; the output contract
// pins 12 significant digits, so numbers are written through format_value.

void write_json(const ordered_json& j, std::ostream& out) {
    switch (j.type()) {
        case ordered_json::value_t::object: {
            out << '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out << ',';
                first = false;
                out << ordered_json(key).dump() << ':';
                write_json(value, out);
            }
            out << '}';
            break;
        }
        case ordered_json::value_t::array: {
            out << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) out << ',';
                write_json(j[i], out);
            }
            out << ']';
            break;
        }
        case ordered_json::value_t::number_float:
            out << detail::format_value(j.get<double>());
            break;
        default:
            out << j.dump();
    }
}

void emit(const ordered_json& j, const std::string& output_path) {
    std::ostringstream text;
    write_json(j, text);
    text << '\n';
    if (output_path.empty()) {
        std::cout << text.str();
        return;
    }
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + output_path);
    out << text.str();
    log_line(LogLevel::info, "report written to " + output_path);
}

ordered_json jnum(double value, bool finite) {
    return finite ? ordered_json(value) : ordered_json("inf");
}

ordered_json jnum(const EvalResult& r) { return jnum(r.value, r.finite); }

ordered_json jopt(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

// --- input loading -----------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RandomVariable load_scenarios(const std::string& path) {
    const RandomVariable rv = to_random_variable(parse_csv_text(read_file(path)));
    log_line(LogLevel::info, "loaded " + std::to_string(rv.size()) + " scenarios from " + path);
    return rv;
}

// --- subcommand payloads ------------------------------------------------------

struct ComputeArgs {
    std::string measure;
    std::string input;
    std::string output;
};

struct DominanceArgs {
    std::string order;
    std::string lhs;
    std::string rhs;
    std::string output;
};

struct VerifyArgs {
    std::string property;
    std::string representation;
    std::string measure;
    std::string input;
    std::vector<std::string> candidates;
    std::string regime = "star";
    std::string mode = "ssd";
    int trials = 500;
    std::uint64_t seed = 42;
    std::string output;
};

struct EnvelopeArgs {
    std::string kind;
    std::string input;
    std::string reference;
    double rho_z = 0.0;
    double rho_zero = 0.0;
    std::string regime = "star";
    std::string output;
};

ScaleRegime parse_regime(const std::string& name) {
    return name == "homog" ? ScaleRegime::PositivelyHomogeneous : ScaleRegime::StarShaped;
}

int run_compute(const ComputeArgs& args) {
    const MeasureSpec spec = parse_measure(args.measure);
    const RandomVariable rv = load_scenarios(args.input);
    const EvalResult value = evaluate(spec, rv);
    ordered_json j;
    j["spec"] = spec.to_text();
    j["value"] = jnum(value);
    j["n_atoms"] = to_distribution(rv).size();
    emit(j, args.output);
    return 0;
}

int run_dominance(const DominanceArgs& args) {
    const EmpiricalDistribution lhs = to_distribution(load_scenarios(args.lhs));
    const EmpiricalDistribution rhs = to_distribution(load_scenarios(args.rhs));
    DominanceVerdict verdict;
    if (args.order == "first") verdict = fsd_compare(lhs, rhs);
    else if (args.order == "second") verdict = ssd_compare(lhs, rhs);
    else verdict = csd_compare(lhs, rhs);
    ordered_json j;
    j["order"] = args.order;
    j["holds"] = verdict.holds;
    if (verdict.witness) {
        ordered_json w;
        w["beta"] = verdict.witness->beta;
        w["lhs"] = verdict.witness->lhs;
        w["rhs"] = verdict.witness->rhs;
        j["witness"] = w;
    } else {
        j["witness"] = nullptr;
    }
    emit(j, args.output);
    return 0;
}

ordered_json property_report_json(const PropertyReport& report) {
    ordered_json j;
    j["property"] = report.property;
    j["spec"] = report.spec;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    j["pass"] = report.pass;
    ordered_json failures = ordered_json::array();
    for (const PropertyFailure& f : report.failures) {
        ordered_json entry;
        entry["seed"] = f.seed;
        entry["input"] = f.input;
        entry["lhs"] = f.lhs;
        entry["rhs"] = f.rhs;
        entry["gap"] = f.gap;
        failures.push_back(entry);
    }
    j["failures"] = failures;
    return j;
}

ordered_json representation_report_json(const RepresentationReport& report) {
    ordered_json j;
    j["target"] = jnum(report.target, report.target_finite);
    ordered_json members = ordered_json::array();
    for (const RepresentationMember& m : report.members) {
        ordered_json entry;
        entry["index"] = m.index;
        entry["in_gamma"] = m.in_gamma;
        entry["alpha"] = jopt(m.alpha);
        entry["c"] = jopt(m.cash_shift);
        entry["value"] = jnum(m.value, m.finite);
        entry["active_breakpoints"] = m.active_breakpoints;
        members.push_back(entry);
    }
    j["members"] = members;
    j["min"] = jnum(report.min_value, report.min_finite);
    j["argmin"] = report.argmin ? ordered_json(*report.argmin) : ordered_json(nullptr);
    j["pass"] = report.pass;
    j["tolerance"] = report.tolerance;
    return j;
}

PropertyReport run_property_check(const VerifyArgs& args, const MeasureSpec& spec) {
    const std::string& p = args.property;
    if (p == "star-shaped") return check_star_shaped(spec, args.trials, args.seed);
    if (p == "positive-homogeneity")
        return check_positive_homogeneity(spec, args.trials, args.seed);
    if (p == "cash-additive") return check_cash_additive(spec, args.trials, args.seed);
    if (p == "cash-subadditive") return check_cash_subadditive(spec, args.trials, args.seed);
    if (p == "monotone") return check_monotone(spec, args.trials, args.seed);
    if (p == "convex") return check_convex(spec, args.trials, args.seed);
    if (p == "ssd-consistent") return check_ssd_consistent(spec, args.trials, args.seed);
    if (p == "csd-consistent") return check_csd_consistent(spec, args.trials, args.seed);
    if (p == "law-invariant") return check_law_invariant(spec, args.trials, args.seed);
    throw CLI::ValidationError("--property", "unknown property '" + p + "'");
}

double finite_or_data_error(const EvalResult& r, const std::string& what) {
    if (!r.finite) throw std::runtime_error(what + " is not finite");
    return r.value;
}

int run_verify(const VerifyArgs& args) {
    const MeasureSpec spec = parse_measure(args.measure);
    if (!args.property.empty()) {
        const PropertyReport report = run_property_check(args, spec);
        log_line(LogLevel::info, "property " + report.property + " on " + report.spec + ": " +
                                     (report.pass ? "pass" : "fail"));
        emit(property_report_json(report), args.output);
        return report.pass ? 0 : 3;
    }

    const RandomVariable x = load_scenarios(args.input);
    const EvalResult rho_x = evaluate(spec, x);
    const double rho_zero = finite_or_data_error(
        evaluate(spec, RandomVariable::constant(x.space(), 0.0)), "measure value at zero");
    const bool ca_mode = args.representation == "ca-var";

    // The family always contains the target itself (index 0); in the
    // cash-additive mode every member enters recentred to measure value 0.
    std::vector<RandomVariable> raw;
    raw.push_back(x);
    for (const std::string& path : args.candidates) raw.push_back(load_scenarios(path));

    CandidateFamily fam;
    fam.rho_zero = rho_zero;
    for (const RandomVariable& w : raw) {
        RandomVariable z = w;
        if (ca_mode) {
            const double rho_w =
                finite_or_data_error(evaluate(spec, w), "candidate measure value");
            z = transform(w, 1.0, -rho_w);
        }
        const EvalResult rho = evaluate(spec, z);
        fam.members.push_back(
            {z, finite_or_data_error(rho, "candidate measure value")});
    }

    RepresentationReport report;
    if (args.representation == "minfamily") {
        report = minfamily_representation_check(
            x, fam, finite_or_data_error(rho_x, "measure value of the input"),
            parse_regime(args.regime),
            args.mode == "csd" ? EnvelopeMode::CsdScale
                               : (args.mode == "affine" ? EnvelopeMode::Affine
                                                        : EnvelopeMode::SsdScale));
    } else if (args.representation == "var-robust") {
        report = var_robust_representation(x, fam, rho_x, parse_regime(args.regime), rho_zero);
    } else {
        report = ca_var_representation(
            x, fam, finite_or_data_error(rho_x, "measure value of the input"));
    }
    log_line(LogLevel::info, "representation " + args.representation + ": " +
                                 (report.pass ? "pass" : "fail"));
    emit(representation_report_json(report), args.output);
    return report.pass ? 0 : 3;
}

int run_envelope(const EnvelopeArgs& args) {
    const RandomVariable x = load_scenarios(args.input);
    const RandomVariable z = load_scenarios(args.reference);
    EnvelopeCertificate cert;
    if (args.kind == "ssd-scale") {
        cert = tilde_rho_z(x, z, args.rho_z, args.rho_zero, parse_regime(args.regime));
    } else if (args.kind == "csd-scale") {
        cert = csd_scale_envelope(x, z, args.rho_z, args.rho_zero);
    } else {
        if (args.rho_zero != 0.0)
            throw CLI::ValidationError("--rho-0", "ssd-affine assumes a zero base value");
        cert = affine_envelope_lp(x, z, args.rho_z);
    }
    ordered_json j;
    j["kind"] = args.kind;
    j["value"] = jnum(cert.value, cert.finite);
    j["alpha"] = jopt(cert.alpha);
    j["c"] = jopt(cert.cash_shift);
    j["active_breakpoints"] = cert.active_breakpoints;
    emit(j, args.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    CLI::App app{"Law-invariant star-shaped risk functionals on finite scenario tables"};
    app.require_subcommand(1);

    ComputeArgs compute_args;
    CLI::App* compute = app.add_subcommand("compute", "Evaluate a measure on a scenario table");
    compute->add_option("--measure", compute_args.measure, "Measure spec, e.g. es:0.9")
        ->required();
    compute->add_option("--input", compute_args.input, "Scenario CSV (value[,weight])")
        ->required();
    compute->add_option("--output", compute_args.output, "Write JSON here instead of stdout");

    DominanceArgs dominance_args;
    CLI::App* dominance =
        app.add_subcommand("dominance", "Test stochastic dominance between two tables");
    dominance->add_option("--order", dominance_args.order, "first|second|convex")
        ->required()
        ->check(CLI::IsMember({"first", "second", "convex"}));
    dominance->add_option("--lhs", dominance_args.lhs, "Dominating-side CSV")->required();
    dominance->add_option("--rhs", dominance_args.rhs, "Dominated-side CSV")->required();
    dominance->add_option("--output", dominance_args.output, "Write JSON here instead of stdout");

    VerifyArgs verify_args;
    CLI::App* verify =
        app.add_subcommand("verify", "Run property checks or representation checks");
    verify->add_option("--property", verify_args.property,
                       "star-shaped|positive-homogeneity|cash-additive|cash-subadditive|"
                       "monotone|convex|ssd-consistent|csd-consistent|law-invariant");
    verify->add_option("--representation", verify_args.representation,
                       "minfamily|var-robust|ca-var")
        ->check(CLI::IsMember({"minfamily", "var-robust", "ca-var"}));
    verify->add_option("--measure", verify_args.measure, "Measure spec under test")->required();
    verify->add_option("--input", verify_args.input, "Target scenario CSV (representation)");
    verify->add_option("--candidates", verify_args.candidates,
                       "Candidate scenario CSVs (representation)");
    verify->add_option("--regime", verify_args.regime, "Scale bound: star (alpha<=1) or homog")
        ->check(CLI::IsMember({"star", "homog"}));
    verify->add_option("--mode", verify_args.mode, "minfamily envelope: ssd|csd|affine")
        ->check(CLI::IsMember({"ssd", "csd", "affine"}));
    verify->add_option("--trials", verify_args.trials, "Trial count (property)")
        ->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_args.seed, "Base seed (property)");
    verify->add_option("--output", verify_args.output, "Write JSON here instead of stdout");

    EnvelopeArgs envelope_args;
    CLI::App* envelope =
        app.add_subcommand("envelope", "Evaluate a dominance envelope of a reference variable");
    envelope->add_option("--kind", envelope_args.kind, "ssd-scale|csd-scale|ssd-affine")
        ->required()
        ->check(CLI::IsMember({"ssd-scale", "csd-scale", "ssd-affine"}));
    envelope->add_option("--input", envelope_args.input, "Target scenario CSV")->required();
    envelope->add_option("--reference", envelope_args.reference, "Reference scenario CSV")
        ->required();
    envelope->add_option("--rho-z", envelope_args.rho_z, "Measure value of the reference")
        ->required();
    envelope->add_option("--rho-0", envelope_args.rho_zero, "Measure value at zero (default 0)");
    envelope->add_option("--regime", envelope_args.regime, "Scale bound: star or homog")
        ->check(CLI::IsMember({"star", "homog"}));
    envelope->add_option("--output", envelope_args.output, "Write JSON here instead of stdout");

    try {
        app.parse(argc, argv);
        if (verify->parsed()) {
            const bool has_property = !verify_args.property.empty();
            const bool has_representation = !verify_args.representation.empty();
            if (has_property == has_representation)
                throw CLI::ValidationError(
                    "verify", "exactly one of --property or --representation is required");
            if (has_representation && verify_args.input.empty())
                throw CLI::ValidationError("verify", "--representation requires --input");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (compute->parsed()) return run_compute(compute_args);
        if (dominance->parsed()) return run_dominance(dominance_args);
        if (verify->parsed()) return run_verify(verify_args);
        return run_envelope(envelope_args);
    } catch (const MeasureParseError& e) {
        std::cerr << "starshape: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "starshape: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "starshape: " << e.what() << "\n";
        return 2;
    }
}
