#include "freeprod/spec_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "freeprod/avitzour.hpp"
#include "freeprod/csv.hpp"
#include "freeprod/element.hpp"
#include "freeprod/finite_dim.hpp"
#include "freeprod/norm_bounds.hpp"
#include "freeprod/stable_rank.hpp"

namespace freeprod {

using nlohmann::json;

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Spec parsing
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& known_commands() {
    static const std::set<std::string> cmds{"validate",       "mul",           "project",
                                            "bound",          "radius",        "certify",
                                            "avitzour-check", "four-point-scan", "window-scan"};
    return cmds;
}

void require(bool cond, const std::string& field, const std::string& message) {
    if (!cond) throw SpecError(field, message);
}

std::set<std::string> algebra_ids(const json& algebras) {
    std::set<std::string> ids;
    for (const auto& a : algebras) ids.insert(a.at("id").get<std::string>());
    return ids;
}

void check_algebras(const json& algebras) {
    require(algebras.is_array() && !algebras.empty(), "algebras", "need a non-empty array of factors");
    std::set<std::string> seen;
    std::size_t idx = 0;
    for (const auto& a : algebras) {
        const std::string field = "algebras[" + std::to_string(idx++) + "]";
        require(a.is_object(), field, "factor must be an object");
        require(a.contains("id") && a.at("id").is_string(), field + ".id", "missing factor id");
        const std::string id = a.at("id").get<std::string>();
        require(seen.insert(id).second, field + ".id", "duplicate factor id '" + id + "'");
        require(a.contains("kind") && a.at("kind").is_string(), field + ".kind", "missing factor kind");
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "integer") {
        } else if (kind == "cyclic") {
            require(a.contains("n") && a.at("n").is_number_integer() && a.at("n").get<int>() >= 2,
                    field + ".n", "cyclic kind needs integer n >= 2");
        } else if (kind == "finite_group") {
            require(a.contains("table") && a.at("table").is_array(), field + ".table",
                    "finite_group kind needs a multiplication table");
        } else if (kind == "finite_dim") {
            require(a.contains("matrix_size") || a.contains("weights") || a.contains("payload"),
                    field, "finite_dim kind needs matrix_size, weights, or a full payload");
        } else {
            throw SpecError(field + ".kind", "unknown kind '" + kind + "'");
        }
    }
}

void check_elements(const json& elements, const std::set<std::string>& ids) {
    require(elements.is_array(), "elements", "must be an array");
    std::set<std::string> seen;
    std::size_t idx = 0;
    for (const auto& e : elements) {
        const std::string field = "elements[" + std::to_string(idx++) + "]";
        require(e.is_object() && e.contains("name") && e.at("name").is_string(), field,
                "element needs a name");
        require(seen.insert(e.at("name").get<std::string>()).second, field + ".name",
                "duplicate element name");
        require(e.contains("terms") && e.at("terms").is_array(), field + ".terms",
                "element needs a terms array");
        std::size_t tidx = 0;
        for (const auto& t : e.at("terms")) {
            const std::string tfield = field + ".terms[" + std::to_string(tidx++) + "]";
            require(t.is_object() && t.contains("word") && t.at("word").is_array(), tfield,
                    "term needs a word array");
            for (const auto& letter : t.at("word")) {
                require(letter.is_array() && letter.size() == 2 && letter[0].is_string() &&
                            letter[1].is_number_integer(),
                        tfield + ".word", "letters are [algebra_id, label] pairs");
                const std::string id = letter[0].get<std::string>();
                require(ids.count(id) > 0, tfield + ".word",
                        "undefined algebra id '" + id + "'");
            }
        }
    }
}

void check_triple_ids(const json& params, const std::set<std::string>& ids) {
    if (!params.contains("triple")) return;
    const json& t = params.at("triple");
    require(t.is_object(), "params.triple", "triple must be an object");
    for (const char* key : {"i1", "i2"}) {
        require(t.contains(key) && t.at(key).is_string(), std::string("params.triple.") + key,
                "missing factor id");
        const std::string id = t.at(key).get<std::string>();
        require(ids.count(id) > 0, std::string("params.triple.") + key,
                "undefined algebra id '" + id + "'");
    }
    for (const char* key : {"x", "y", "z"})
        require(t.contains(key) && t.at(key).is_number_integer(), std::string("params.triple.") + key,
                "missing basis label");
}

}  // namespace

json ExperimentSpec::canonical() const {
    json j;
    j["command"] = command;
    j["mode"] = mode;
    j["tolerance"] = tolerance;
    j["seed"] = seed;
    j["output_prefix"] = output_prefix;
    j["algebras"] = algebras;
    j["elements"] = elements;
    j["params"] = params;
    return j;
}

ExperimentSpec parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError("<document>", e.what());
    }
    require(j.is_object(), "<document>", "spec must be a JSON object");

    ExperimentSpec spec;
    require(j.contains("command") && j.at("command").is_string(), "command", "missing command");
    spec.command = j.at("command").get<std::string>();
    require(known_commands().count(spec.command) > 0, "command",
            "unknown command '" + spec.command + "'");

    if (j.contains("mode")) {
        require(j.at("mode").is_string(), "mode", "mode must be a string");
        spec.mode = j.at("mode").get<std::string>();
        require(spec.mode == "exact" || spec.mode == "float", "mode", "mode is 'exact' or 'float'");
    }
    if (j.contains("tolerance")) {
        require(j.at("tolerance").is_number(), "tolerance", "tolerance must be numeric");
        spec.tolerance = j.at("tolerance").get<double>();
        require(spec.tolerance > 0, "tolerance", "tolerance must be positive");
    }
    if (j.contains("seed")) {
        require(j.at("seed").is_number_unsigned() || j.at("seed").is_number_integer(), "seed",
                "seed must be a nonnegative integer");
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output_prefix")) {
        require(j.at("output_prefix").is_string(), "output_prefix", "must be a string");
        spec.output_prefix = j.at("output_prefix").get<std::string>();
    }

    spec.algebras = j.value("algebras", json::array());
    if (!spec.algebras.empty() || spec.command == "validate" || spec.command == "mul" ||
        spec.command == "project" || spec.command == "bound" || spec.command == "radius" ||
        spec.command == "certify")
        check_algebras(spec.algebras);

    spec.elements = j.value("elements", json::array());
    check_elements(spec.elements, algebra_ids(spec.algebras));

    spec.params = j.value("params", json::object());
    require(spec.params.is_object(), "params", "params must be an object");
    check_triple_ids(spec.params, algebra_ids(spec.algebras));

    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> allowed{"command", "mode",   "tolerance", "seed",
                                                   "output_prefix", "algebras", "elements", "params"};
        require(allowed.count(it.key()) > 0, it.key(), "unknown top-level field");
    }
    return spec;
}

std::string emit_spec(const ExperimentSpec& spec) { return spec.canonical().dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Resolution of algebras and elements
// ---------------------------------------------------------------------------

namespace {

std::complex<double> parse_json_complex_entry(const json& v, const std::string& field) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw SpecError(field, "complex entries are numbers or [re, im] pairs");
}

FiniteDimSpec finite_dim_from_json(const json& a, const std::string& field) {
    if (a.contains("matrix_size")) {
        int n = a.at("matrix_size").get<int>();
        require(n >= 2, field + ".matrix_size", "matrix size must be >= 2");
        return matrix_algebra_spec(n);
    }
    if (a.contains("weights")) {
        const json& w = a.at("weights");
        require(w.is_array() && w.size() == 2, field + ".weights", "need two trace weights");
        return two_point_algebra_spec(w[0].get<double>(), w[1].get<double>());
    }
    const json& p = a.at("payload");
    FiniteDimSpec spec;
    spec.dim = p.at("dim").get<int>();
    auto grab_vec = [&](const json& arr, const std::string& f) {
        std::vector<std::complex<double>> out;
        for (const auto& v : arr) out.push_back(parse_json_complex_entry(v, f));
        return out;
    };
    for (const auto& row : p.at("mult")) {
        spec.mult.emplace_back();
        for (const auto& cell : row) spec.mult.back().push_back(grab_vec(cell, field + ".payload.mult"));
    }
    for (const auto& row : p.at("star")) spec.star.push_back(grab_vec(row, field + ".payload.star"));
    spec.trace = grab_vec(p.at("trace"), field + ".payload.trace");
    spec.unit = grab_vec(p.at("unit"), field + ".payload.unit");
    for (const auto& row : p.at("seed")) spec.seed.push_back(grab_vec(row, field + ".payload.seed"));
    return spec;
}

template <class S>
Algebra<S> build_algebra(const json& a, double tol) {
    const std::string id = a.at("id").get<std::string>();
    const std::string kind = a.at("kind").get<std::string>();
    if (kind == "integer") return make_integer_algebra<S>(id);
    if (kind == "cyclic") return make_cyclic_algebra<S>(id, a.at("n").get<int>());
    if (kind == "finite_group") {
        std::vector<std::vector<std::int64_t>> table;
        for (const auto& row : a.at("table")) {
            table.emplace_back();
            for (const auto& v : row) table.back().push_back(v.get<std::int64_t>());
        }
        try {
            return make_group_algebra<S>(id, std::move(table));
        } catch (const std::invalid_argument& e) {
            throw SpecError("algebras." + id + ".table", e.what());
        }
    }
    if (kind == "finite_dim") {
        if constexpr (scalar_traits<S>::exact)
            throw SpecError("algebras." + id, "finite_dim factors are float-mode only");
        else
            return gram_schmidt_onb(id, finite_dim_from_json(a, "algebras." + id), tol);
    }
    throw SpecError("algebras." + id + ".kind", "unknown kind");
}

template <class S>
FreeProduct<S> build_family(const json& algebras, double tol) {
    std::vector<Algebra<S>> factors;
    for (const auto& a : algebras) factors.push_back(build_algebra<S>(a, tol));
    try {
        return FreeProduct<S>(std::move(factors));
    } catch (const std::invalid_argument& e) {
        throw SpecError("algebras", e.what());
    }
}

template <class S>
S parse_coeff(const json& term) {
    std::string re = "0", im = "0";
    if (term.contains("re")) {
        const json& v = term.at("re");
        re = v.is_string() ? v.get<std::string>() : csv_num(v.get<double>());
    }
    if (term.contains("im")) {
        const json& v = term.at("im");
        im = v.is_string() ? v.get<std::string>() : csv_num(v.get<double>());
    }
    try {
        return scalar_traits<S>::parse(re, im);
    } catch (const std::exception& e) {
        throw SpecError("elements.terms", std::string("bad coefficient: ") + e.what());
    }
}

template <class S>
Element<S> build_element(const json& def, const FreeProduct<S>& fp) {
    Element<S> out;
    for (const auto& term : def.at("terms")) {
        Word w;
        for (const auto& letter : term.at("word")) {
            const std::string id = letter[0].get<std::string>();
            auto idx = fp.index_of(id);
            if (!idx) throw SpecError("elements.terms.word", "undefined algebra id '" + id + "'");
            w.push_back(Letter{*idx, letter[1].get<std::int64_t>()});
        }
        try {
            fp.check_word(w);
        } catch (const std::invalid_argument& e) {
            throw SpecError("elements.terms.word", e.what());
        }
        out.add_term(w, parse_coeff<S>(term), fp.prune_tol());
    }
    return out;
}

template <class S>
Element<S> named_element(const json& elements, const std::string& name, const FreeProduct<S>& fp) {
    for (const auto& e : elements)
        if (e.at("name").get<std::string>() == name) return build_element(e, fp);
    throw SpecError("params.element", "undefined element '" + name + "'");
}

template <class S>
std::string word_display(const FreeProduct<S>& fp, const Word& w) {
    if (w.empty()) return "1";
    std::string out;
    for (const Letter& l : w) {
        if (!out.empty()) out.push_back(' ');
        out += fp.factor(l.factor).id + ":" + std::to_string(l.label);
    }
    return out;
}

// Element as JSON in the literal format, so exported certificates round-trip
// through the element parser.
template <class S>
json element_to_json(const FreeProduct<S>& fp, const Element<S>& a) {
    json terms = json::array();
    for (const auto& [w, c] : a.terms()) {
        json word = json::array();
        for (const Letter& l : w) word.push_back({fp.factor(l.factor).id, l.label});
        auto z = scalar_traits<S>::to_complex(c);
        terms.push_back({{"word", word}, {"re", csv_num(z.real())}, {"im", csv_num(z.imag())}});
    }
    return terms;
}

template <class S>
AvitzourTriple parse_triple(const json& params, const FreeProduct<S>& fp) {
    if (!params.contains("triple")) {
        // Default: the canonical free-group triple when the family is free.
        return default_free_triple();
    }
    const json& t = params.at("triple");
    AvitzourTriple out;
    auto i1 = fp.index_of(t.at("i1").get<std::string>());
    auto i2 = fp.index_of(t.at("i2").get<std::string>());
    if (!i1 || !i2) throw SpecError("params.triple", "triple references an undefined algebra id");
    out.factor_x = *i1;
    out.factor_yz = *i2;
    out.x = t.at("x").get<std::int64_t>();
    out.y = t.at("y").get<std::int64_t>();
    out.z = t.at("z").get<std::int64_t>();
    return out;
}

ConjugatorChoice parse_choice(const json& params) {
    const std::string c = params.value("conjugators", "auto");
    if (c == "auto") return ConjugatorChoice::Auto;
    if (c == "general") return ConjugatorChoice::General;
    if (c == "shortcut") return ConjugatorChoice::FreeShortcut;
    throw SpecError("params.conjugators", "expected auto | general | shortcut");
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

struct CommandOutput {
    CsvTable table{std::vector<std::string>{}};
    json summary;
    int exit_code = 0;
};

template <class S>
CommandOutput cmd_validate(const ExperimentSpec& spec) {
    FreeProduct<S> fp = build_family<S>(spec.algebras, spec.tolerance);
    const std::string target = spec.params.value("algebra", std::string());
    const int depth = spec.params.value("sample_depth", 4);

    CommandOutput out;
    out.table = CsvTable({"operation", "check", "where", "magnitude"});
    json per_factor = json::object();
    bool all_pass = true;
    for (std::uint32_t i = 0; i < fp.factor_count(); ++i) {
        const auto& alg = fp.factor(i);
        if (!target.empty() && alg.id != target) continue;
        ValidationReport rep = validate_table(alg, depth, spec.tolerance);
        for (const auto& issue : rep.issues)
            out.table.add_row({"validate_table", issue.check, issue.where, csv_num(issue.magnitude)});
        per_factor[alg.id] = {{"pass", rep.pass()},
                              {"checks_run", rep.checks_run},
                              {"max_residual", rep.max_residual}};
        all_pass = all_pass && rep.pass();
    }
    out.summary["factors"] = per_factor;
    out.summary["pass"] = all_pass;
    out.exit_code = all_pass ? 0 : 3;
    return out;
}

template <class S>
CommandOutput cmd_mul_or_project(const ExperimentSpec& spec, bool project) {
    FreeProduct<S> fp = build_family<S>(spec.algebras, spec.tolerance);
    CommandOutput out;
    out.table = CsvTable({"operation", "word", "re", "im"});
    Element<S> result;
    const char* op = project ? "project_level" : "multiply";
    if (project) {
        Element<S> a = named_element(spec.elements, spec.params.at("element").get<std::string>(), fp);
        result = project_level(a, spec.params.at("level").get<int>());
    } else {
        Element<S> a = named_element(spec.elements, spec.params.at("left").get<std::string>(), fp);
        Element<S> b = named_element(spec.elements, spec.params.at("right").get<std::string>(), fp);
        result = fp.multiply(a, b);
    }
    for (const auto& [w, c] : result.terms()) {
        auto z = scalar_traits<S>::to_complex(c);
        out.table.add_row({op, word_display(fp, w), csv_num(z.real()), csv_num(z.imag())});
    }
    out.summary["support_size"] = result.support_size();
    out.summary["two_norm"] = two_norm(result);
    out.summary["max_level"] = result.max_level();
    return out;
}

template <class S>
CommandOutput cmd_bound(const ExperimentSpec& spec) {
    FreeProduct<S> fp = build_family<S>(spec.algebras, spec.tolerance);
    Element<S> a = named_element(spec.elements, spec.params.at("element").get<std::string>(), fp);
    const int trials = spec.params.value("trials", 32);
    const int level_cap = spec.params.value("test_level_cap", 4);

    CommandOutput out;
    out.table = CsvTable({"operation", "detail", "value"});
    out.table.add_row({"two_norm", "", csv_num(two_norm(a))});

    const int k = a.max_level();
    bool homogeneous = !a.is_zero();
    for (const auto& [w, c] : a.terms()) homogeneous = homogeneous && block_length(w) == k;
    if (homogeneous) {
        double b = haagerup_homogeneous_bound(fp, a);
        out.table.add_row({"haagerup_homogeneous_bound", "k=" + std::to_string(k), csv_num(b)});
        out.summary["haagerup_homogeneous_bound"] = b;
    }
    double hb = haagerup_bound(fp, a, k);
    out.table.add_row({"haagerup_bound", "k=" + std::to_string(k), csv_num(hb)});
    out.summary["haagerup_bound"] = hb;

    bool all_free = true;
    for (std::uint32_t i = 0; i < fp.factor_count(); ++i)
        all_free = all_free && fp.factor(i).kind == AlgebraKind::Integer;
    if (all_free) {
        long n = max_generator_length(fp, a);
        double fb = free_group_word_bound(fp, a);
        out.table.add_row({"free_group_word_bound", "N=" + std::to_string(n), csv_num(fb)});
        out.summary["free_group_word_bound"] = fb;
    }
    double lower = opnorm_lower(fp, a, trials, spec.seed, level_cap);
    out.table.add_row({"opnorm_lower",
                       "trials=" + std::to_string(trials) + " level_cap=" + std::to_string(level_cap),
                       csv_num(lower)});
    out.summary["opnorm_lower"] = lower;
    return out;
}

void append_radius_rows(CsvTable& table, const RadiusCertificate& cert) {
    for (const auto& row : cert.trail)
        table.add_row({"certified_radius", csv_num(row.m), csv_num(row.power_two_norm_log10),
                       csv_num(row.degree_bound), csv_num(row.bound)});
}

json radius_summary(const RadiusCertificate& cert) {
    return {{"element", cert.element},
            {"conjugators", cert.conjugators},
            {"two_norm", cert.element_two_norm},
            {"k_constant", cert.k_constant},
            {"base_level", cert.base_level},
            {"conj_level", cert.conj_level},
            {"m_max", cert.m_max},
            {"best_bound", cert.best_bound},
            {"best_m", cert.best_m},
            {"verified_powers", cert.verified_powers}};
}

template <class S>
CommandOutput cmd_radius(const ExperimentSpec& spec) {
    FreeProduct<S> fp = build_family<S>(spec.algebras, spec.tolerance);
    Element<S> a = named_element(spec.elements, spec.params.at("element").get<std::string>(), fp);
    ConjugatorPair<S> pair;
    if (spec.params.contains("left") && spec.params.contains("right")) {
        // audit mode: certify against user-supplied conjugators
        pair.left = named_element(spec.elements, spec.params.at("left").get<std::string>(), fp);
        pair.right = named_element(spec.elements, spec.params.at("right").get<std::string>(), fp);
        pair.base_level = a.max_level();
        pair.conj_level = std::max(pair.left.max_level(), pair.right.max_level());
    } else {
        AvitzourTriple triple = parse_triple(spec.params, fp);
        pair = build_conjugators(fp, a, triple, parse_choice(spec.params));
    }
    const long m_max = spec.params.value("m_max", 64L);

    RadiusOptions ropt;
    ropt.tol = spec.tolerance > 0 ? std::max(spec.tolerance, 1e-9) : 1e-9;
    RadiusCertificate cert = certified_radius(fp, a, pair.left, pair.right, m_max, ropt);

    CommandOutput out;
    out.table = CsvTable({"operation", "m", "power_two_norm_log10", "degree_bound", "bound"});
    append_radius_rows(out.table, cert);
    out.summary = radius_summary(cert);
    out.summary["construction"] =
        spec.params.contains("left") ? std::string("supplied conjugators") : pair.describe();
    return out;
}

json verification_summary(const PowerIdentityReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"m", r.m},
                        {"norm_sq", r.norm_sq},
                        {"expected_norm_sq", r.expected_norm_sq},
                        {"norm_ok", r.norm_ok},
                        {"k_constant_sq", r.k_constant_sq},
                        {"k_ok", r.k_ok},
                        {"support", r.support},
                        {"expected_support", r.expected_support},
                        {"support_ok", r.support_ok}});
    return {{"m_cap", rep.m_cap},
            {"norm_identity", rep.norm_identity},
            {"k_constant", rep.k_constant},
            {"support_multiplicative", rep.support_multiplicative},
            {"first_violation_m", rep.first_violation_m},
            {"rows", rows}};
}

template <class S>
CommandOutput cmd_certify(const ExperimentSpec& spec) {
    FreeProduct<S> fp = build_family<S>(spec.algebras, spec.tolerance);
    Element<S> a = named_element(spec.elements, spec.params.at("element").get<std::string>(), fp);
    AvitzourTriple triple = parse_triple(spec.params, fp);
    if (!spec.params.contains("epsilon")) throw SpecError("params.epsilon", "certify needs epsilon");
    const double epsilon = spec.params.at("epsilon").get<double>();

    DistanceOptions dopt;
    dopt.choice = parse_choice(spec.params);
    dopt.m_budget = spec.params.value("m_budget", 1000000L);
    DistanceCertificate<S> cert = distance_certificate(fp, a, triple, epsilon, dopt);

    CommandOutput out;
    out.table = CsvTable({"operation", "m", "power_two_norm_log10", "degree_bound", "bound"});
    append_radius_rows(out.table, cert.radius);
    out.summary["radius"] = radius_summary(cert.radius);
    out.summary["verification"] = verification_summary(cert.verification);
    out.summary["construction"] = cert.conjugator_desc;
    out.summary["left_conjugator"] = element_to_json(fp, cert.left);
    out.summary["right_conjugator"] = element_to_json(fp, cert.right);
    out.summary["approximant"] = element_to_json(fp, cert.approximant);
    out.summary["lambda"] = cert.lambda;
    out.summary["claimed_distance"] = cert.claimed_distance;
    out.summary["epsilon"] = cert.epsilon;
    out.summary["target_bound"] = cert.target_bound;
    out.summary["reached_target"] = cert.reached_target;
    out.summary["unitary_residual"] = cert.unitary_residual;
    out.summary["two_norm"] = two_norm(a);
    out.summary["approximant_support"] = cert.approximant.support_size();
    out.exit_code = cert.reached_target ? 0 : 4;
    return out;
}

CommandOutput cmd_avitzour(const ExperimentSpec& spec) {
    const std::string check = spec.params.value("check", "");
    CommandOutput out;
    out.table = CsvTable({"operation", "detail", "value"});

    if (check == "root_of_unity") {
        const int n = spec.params.at("n").get<int>();
        std::vector<double> traces(static_cast<std::size_t>(n), 1.0 / n);
        if (spec.params.contains("traces")) traces = spec.params.at("traces").get<std::vector<double>>();
        auto coeffs = root_of_unity_unitary(n, traces);
        double worst = 0.0;
        for (int j = 1; j < n; ++j) {
            std::complex<double> acc{};
            for (int k = 0; k < n; ++k) {
                std::complex<double> p{1.0, 0.0};
                for (int q = 0; q < j; ++q) p *= coeffs[static_cast<std::size_t>(k)];
                acc += p / static_cast<double>(n);
            }
            out.table.add_row({"root_of_unity_unitary", "moment_" + std::to_string(j), csv_num(std::abs(acc))});
            worst = std::max(worst, std::abs(acc));
        }
        out.summary = {{"check", check}, {"n", n}, {"max_moment_residual", worst}};
        return out;
    }
    if (check == "zero_trace") {
        auto traces = spec.params.at("traces").get<std::vector<double>>();
        ZeroTraceUnitary u = zero_trace_unitary(traces);
        for (int b = 0; b < 3; ++b)
            out.table.add_row({"zero_trace_unitary", "merged_trace_" + std::to_string(b + 1),
                               csv_num(u.merged_traces[static_cast<std::size_t>(b)])});
        out.table.add_row({"zero_trace_unitary", "trace_residual", csv_num(u.trace_residual)});
        out.summary = {{"check", check},
                       {"merged_traces", u.merged_traces},
                       {"trace_residual", u.trace_residual}};
        return out;
    }
    if (check == "matrix_pair") {
        const int n = spec.params.at("n").get<int>();
        MatrixPair mp = matrix_avitzour_pair(n);
        auto tr = [n](const std::vector<std::complex<double>>& m) {
            std::complex<double> acc{};
            for (int i = 0; i < n; ++i)
                acc += m[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(i)];
            return acc / static_cast<double>(n);
        };
        std::complex<double> tvu{};
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                tvu += std::conj(mp.v[static_cast<std::size_t>(c) * static_cast<std::size_t>(n) +
                                      static_cast<std::size_t>(r)]) *
                       mp.u[static_cast<std::size_t>(c) * static_cast<std::size_t>(n) +
                            static_cast<std::size_t>(r)];
        tvu /= static_cast<double>(n);
        out.table.add_row({"matrix_avitzour_pair", "abs_trace_u", csv_num(std::abs(tr(mp.u)))});
        out.table.add_row({"matrix_avitzour_pair", "abs_trace_v", csv_num(std::abs(tr(mp.v)))});
        out.table.add_row({"matrix_avitzour_pair", "abs_trace_vstar_u", csv_num(std::abs(tvu))});
        out.summary = {{"check", check},
                       {"n", n},
                       {"max_residual", std::max({std::abs(tr(mp.u)), std::abs(tr(mp.v)), std::abs(tvu)})}};
        return out;
    }
    if (check == "atom") {
        const int n = spec.params.at("n").get<int>();
        const double mass = spec.params.at("atom_mass").get<double>();
        AtomObstructionVerdict v = atom_obstruction(n, mass);
        out.table.add_row({"atom_obstruction", "alpha", csv_num(v.alpha)});
        out.table.add_row({"atom_obstruction", "min_eigenvalue", csv_num(v.min_eigenvalue)});
        out.summary = {{"check", check},
                       {"n", n},
                       {"atom_mass", mass},
                       {"min_eigenvalue", v.min_eigenvalue},
                       {"feasible", v.feasible}};
        return out;
    }
    if (check == "haar") {
        const int range = spec.params.value("moment_range", 8);
        std::vector<ShippedMeasure> targets;
        if (spec.params.contains("measure") && spec.params.at("measure").is_object()) {
            // custom measure: atoms as {point, mass}, intervals with density
            // polynomial coefficients
            const json& mj = spec.params.at("measure");
            ShippedMeasure m;
            m.name = mj.value("name", std::string("custom"));
            for (const auto& a : mj.value("atoms", json::array()))
                m.measure.atoms.push_back({a.at("point").get<double>(), a.at("mass").get<double>()});
            for (const auto& iv : mj.value("intervals", json::array()))
                m.measure.intervals.push_back({iv.at("a").get<double>(), iv.at("b").get<double>(),
                                               iv.at("density").get<std::vector<double>>()});
            m.f = PiecewiseMonotoneFn::identity();
            targets.push_back(std::move(m));
        } else {
            const std::string name = spec.params.value("measure", "all");
            for (auto& m : shipped_measures())
                if (name == "all" || m.name == name) targets.push_back(std::move(m));
            if (targets.empty())
                throw SpecError("params.measure", "unknown shipped measure '" + name + "'");
        }
        double worst = 0.0;
        for (const auto& m : targets) {
            PhaseFunction u = haar_unitary_from_measure(m.measure, m.f);
            for (int n = -range; n <= range; ++n) {
                if (n == 0) continue;
                double v = std::abs(u.moment(n));
                out.table.add_row({"haar_unitary_from_measure", m.name + "_moment_" + std::to_string(n),
                                   csv_num(v)});
                worst = std::max(worst, v);
            }
        }
        out.summary = {{"check", check}, {"max_moment_residual", worst}};
        return out;
    }
    throw SpecError("params.check",
                    "expected root_of_unity | zero_trace | matrix_pair | atom | haar");
}

CommandOutput cmd_four_point(const ExperimentSpec& spec) {
    const int restarts = spec.params.value("restarts", 200);
    std::vector<double> betas = spec.params.value("beta_values", std::vector<double>{0.0, 0.25, 1.0 / 3.0});

    CommandOutput out;
    out.table = CsvTable({"operation", "beta", "residual", "best_restart", "theta1", "theta2", "theta3",
                          "phi1", "phi2", "phi3"});
    double min_res = std::numeric_limits<double>::infinity();
    double max_res = 0.0;
    for (double beta : betas) {
        FourPointResult r = four_point_infeasibility(beta, restarts, spec.seed);
        out.table.add_row({"four_point_infeasibility", csv_num(beta), csv_num(r.residual),
                           csv_num(r.best_restart), csv_num(r.angles[0]), csv_num(r.angles[1]),
                           csv_num(r.angles[2]), csv_num(r.angles[3]), csv_num(r.angles[4]),
                           csv_num(r.angles[5])});
        min_res = std::min(min_res, r.residual);
        max_res = std::max(max_res, r.residual);
    }
    out.summary = {{"restarts", restarts},
                   {"min_residual", min_res},
                   {"max_residual", max_res},
                   {"span_ratio", min_res > 0 ? max_res / min_res : std::numeric_limits<double>::infinity()}};
    return out;
}

CommandOutput cmd_window_scan(const ExperimentSpec& spec) {
    std::vector<double> alphas;
    if (spec.params.contains("alpha_values")) {
        alphas = spec.params.at("alpha_values").get<std::vector<double>>();
    } else {
        const int steps = spec.params.value("steps", 50);
        for (int i = steps; i >= 1; --i) alphas.push_back(0.5 * i / steps);
    }
    const int grid = spec.params.value("grid", 100000);

    CommandOutput out;
    out.table = CsvTable({"operation", "alpha", "beta", "gamma", "im_lo", "im_hi"});
    double alpha0 = 0.0;
    for (double alpha : alphas) {
        PhaseWindow w = phase_window_scan(alpha, grid);
        out.table.add_row({"phase_window_scan", csv_num(w.alpha), csv_num(w.beta), csv_num(w.gamma),
                           csv_num(w.lo), csv_num(w.hi)});
        if (w.nonempty && (w.lo <= 2.0 / 3.0 || w.hi >= 4.0 / 3.0)) alpha0 = std::max(alpha0, alpha);
    }
    out.summary = {{"empirical_alpha0", alpha0}, {"grid", grid}};
    return out;
}

template <class S>
CommandOutput dispatch_typed(const ExperimentSpec& spec) {
    if (spec.command == "validate") return cmd_validate<S>(spec);
    if (spec.command == "mul") return cmd_mul_or_project<S>(spec, false);
    if (spec.command == "project") return cmd_mul_or_project<S>(spec, true);
    if (spec.command == "bound") return cmd_bound<S>(spec);
    if (spec.command == "radius") return cmd_radius<S>(spec);
    if (spec.command == "certify") return cmd_certify<S>(spec);
    throw SpecError("command", "not an element command");
}

CommandOutput dispatch(const ExperimentSpec& spec) {
    if (spec.command == "avitzour-check") return cmd_avitzour(spec);
    if (spec.command == "four-point-scan") return cmd_four_point(spec);
    if (spec.command == "window-scan") return cmd_window_scan(spec);
    if (spec.mode == "exact") return dispatch_typed<ExactComplex>(spec);
    return dispatch_typed<std::complex<double>>(spec);
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& original, const RunOptions& options) {
    ExperimentSpec spec = original;
    if (!options.mode_override.empty()) spec.mode = options.mode_override;
    if (!options.seed_override.empty()) spec.seed = std::stoull(options.seed_override);
    if (options.tol_override > 0) spec.tolerance = options.tol_override;

    RunResult result;
    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path csv_path = options.out_dir / (spec.output_prefix + "_report.csv");
    const std::filesystem::path sum_path = options.out_dir / (spec.output_prefix + "_summary.json");

    CommandOutput out;
    try {
        out = dispatch(spec);
    } catch (const SpecError& e) {
        result.exit_code = 2;
        result.summary = {{"error", e.what()}, {"field", e.field}, {"command", spec.command}};
        write_file_atomic(sum_path, result.summary.dump(2) + "\n");
        result.files.push_back(sum_path.string());
        return result;
    } catch (const CertificateError& e) {
        result.exit_code = 3;
        result.summary = {{"error", e.what()}, {"command", spec.command}};
        write_file_atomic(sum_path, result.summary.dump(2) + "\n");
        result.files.push_back(sum_path.string());
        return result;
    } catch (const std::invalid_argument& e) {
        result.exit_code = 2;
        result.summary = {{"error", e.what()}, {"command", spec.command}};
        write_file_atomic(sum_path, result.summary.dump(2) + "\n");
        result.files.push_back(sum_path.string());
        return result;
    }

    out.summary["command"] = spec.command;
    out.summary["mode"] = spec.mode;
    out.summary["seed"] = spec.seed;
    out.summary["rows"] = out.table.row_count();
    write_file_atomic(csv_path, out.table.to_string());
    write_file_atomic(sum_path, out.summary.dump(2) + "\n");
    result.exit_code = out.exit_code;
    result.summary = out.summary;
    result.files = {csv_path.string(), sum_path.string()};
    return result;
}

}  // namespace freeprod
