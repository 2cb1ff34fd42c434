#include "fasta/trace_io.hpp"

#include "fasta/errors.hpp"
#include "fasta/matrix_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

namespace fasta {

using json = nlohmann::ordered_json;

OptionsRecord snapshot(const Options &o) {
    OptionsRecord r;
    r.verbose = o.verbose;
    r.tol = o.tol;
    r.max_iters = o.max_iters;
    r.record_objective = o.record_objective;
    r.record_iterates = o.record_iterates;
    r.adaptive = o.adaptive;
    r.accelerate = o.accelerate;
    r.restart = o.restart;
    r.backtrack = o.backtrack;
    r.tau = o.tau;
    r.lipschitz = o.lipschitz;
    r.stop_rule = o.stop_rule;
    r.string_header = o.string_header;
    r.seed = o.seed;
    r.monitor_supplied = static_cast<bool>(o.monitor);
    r.stop_now_supplied = static_cast<bool>(o.stop_now);
    return r;
}

Options to_options(const OptionsRecord &r) {
    Options o;
    o.verbose = r.verbose;
    o.tol = r.tol;
    o.max_iters = r.max_iters;
    o.record_objective = r.record_objective;
    o.record_iterates = r.record_iterates;
    o.adaptive = r.adaptive;
    o.accelerate = r.accelerate;
    o.restart = r.restart;
    o.backtrack = r.backtrack;
    o.tau = r.tau;
    o.lipschitz = r.lipschitz;
    o.stop_rule = r.stop_rule;
    o.string_header = r.string_header;
    o.seed = r.seed;
    return o;
}

namespace {

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_bits(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_bits(a[i], b[i]))
            return false;
    return true;
}

bool same_bits(const Vector &a, const Vector &b) {
    if (a.size() != b.size())
        return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (!same_bits(a[i], b[i]))
            return false;
    return true;
}

} // namespace

bool operator==(const Trace &a, const Trace &b) {
    if (!(same_bits(a.solve_time, b.solve_time) && same_bits(a.residuals, b.residuals) &&
          same_bits(a.stepsizes, b.stepsizes) && same_bits(a.normalized_residuals, b.normalized_residuals) &&
          same_bits(a.objective, b.objective) && same_bits(a.func_values, b.func_values) &&
          a.backtracks == b.backtracks && same_bits(a.lipschitz_estimate, b.lipschitz_estimate) &&
          same_bits(a.initial_stepsize, b.initial_stepsize) && a.iteration_count == b.iteration_count &&
          a.iterates.size() == b.iterates.size()))
        return false;
    for (std::size_t i = 0; i < a.iterates.size(); ++i)
        if (!same_bits(a.iterates[i], b.iterates[i]))
            return false;
    return true;
}

bool operator==(const RunRecord &a, const RunRecord &b) {
    return a.options == b.options && a.trace == b.trace && a.termination == b.termination &&
           a.problem == b.problem && a.seed == b.seed;
}

namespace {

// JSON has no inf/nan; those are spelled as strings.
json encode(double v) {
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

json encode(const std::vector<double> &v) {
    json arr = json::array();
    for (double x : v)
        arr.push_back(encode(x));
    return arr;
}

json encode(const Vector &v) {
    json arr = json::array();
    for (double x : v)
        arr.push_back(encode(x));
    return arr;
}

json encode(const std::optional<double> &v) { return v ? encode(*v) : json(nullptr); }

json encode(const OptionsRecord &o) {
    json j;
    j["verbose"] = o.verbose;
    j["tol"] = encode(o.tol);
    j["max_iters"] = o.max_iters;
    j["record_objective"] = o.record_objective;
    j["record_iterates"] = o.record_iterates;
    j["adaptive"] = o.adaptive;
    j["accelerate"] = o.accelerate;
    j["restart"] = o.restart;
    j["backtrack"] = o.backtrack;
    j["tau"] = encode(o.tau);
    j["lipschitz"] = encode(o.lipschitz);
    j["stop_rule"] = std::string(to_string(o.stop_rule));
    j["string_header"] = o.string_header;
    j["seed"] = o.seed;
    j["monitor_supplied"] = o.monitor_supplied;
    j["stop_now_supplied"] = o.stop_now_supplied;
    return j;
}

json encode(const Trace &t) {
    json j;
    j["solve_time"] = encode(t.solve_time);
    j["iteration_count"] = t.iteration_count;
    j["backtracks"] = t.backtracks;
    j["lipschitz_estimate"] = encode(t.lipschitz_estimate);
    j["initial_stepsize"] = encode(t.initial_stepsize);
    j["residuals"] = encode(t.residuals);
    j["normalized_residuals"] = encode(t.normalized_residuals);
    j["stepsizes"] = encode(t.stepsizes);
    j["objective"] = encode(t.objective);
    j["func_values"] = encode(t.func_values);
    json its = json::array();
    for (const auto &x : t.iterates)
        its.push_back(encode(x));
    j["iterates"] = std::move(its);
    return j;
}

json encode(const ProblemDescriptor &p) {
    json j;
    j["builder"] = p.builder;
    json params = json::object();
    for (const auto &[k, v] : p.parameters)
        params[k] = encode(v);
    j["parameters"] = std::move(params);
    json settings = json::object();
    for (const auto &[k, v] : p.settings)
        settings[k] = v;
    j["settings"] = std::move(settings);
    json data = json::object();
    for (const auto &[k, v] : p.data)
        data[k] = v;
    j["data"] = std::move(data);
    return j;
}

// ---- strict decoding ------------------------------------------------------

[[noreturn]] void schema_error(const std::string &where, const std::string &msg) {
    throw ParseError("run document: " + where + ": " + msg);
}

void expect_keys(const json &j, const std::string &where, std::initializer_list<const char *> keys) {
    if (!j.is_object())
        schema_error(where, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto &item : j.items())
        if (!allowed.count(item.key()))
            schema_error(where, "unknown key '" + item.key() + "'");
    for (const char *k : keys)
        if (!j.contains(k))
            schema_error(where, "missing key '" + std::string(k) + "'");
}

double decode_double(const json &j, const std::string &where) {
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto &s = j.get_ref<const std::string &>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
    }
    schema_error(where, "expected a number");
}

std::optional<double> decode_optional(const json &j, const std::string &where) {
    if (j.is_null())
        return std::nullopt;
    return decode_double(j, where);
}

long decode_long(const json &j, const std::string &where) {
    if (!j.is_number_integer())
        schema_error(where, "expected an integer");
    return j.get<long>();
}

bool decode_bool(const json &j, const std::string &where) {
    if (!j.is_boolean())
        schema_error(where, "expected a boolean");
    return j.get<bool>();
}

std::string decode_string(const json &j, const std::string &where) {
    if (!j.is_string())
        schema_error(where, "expected a string");
    return j.get<std::string>();
}

std::vector<double> decode_list(const json &j, const std::string &where) {
    if (!j.is_array())
        schema_error(where, "expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(decode_double(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

OptionsRecord decode_options(const json &j) {
    expect_keys(j, "options",
                {"verbose", "tol", "max_iters", "record_objective", "record_iterates", "adaptive", "accelerate",
                 "restart", "backtrack", "tau", "lipschitz", "stop_rule", "string_header", "seed",
                 "monitor_supplied", "stop_now_supplied"});
    OptionsRecord o;
    o.verbose = static_cast<int>(decode_long(j["verbose"], "options.verbose"));
    o.tol = decode_double(j["tol"], "options.tol");
    o.max_iters = decode_long(j["max_iters"], "options.max_iters");
    o.record_objective = decode_bool(j["record_objective"], "options.record_objective");
    o.record_iterates = decode_bool(j["record_iterates"], "options.record_iterates");
    o.adaptive = decode_bool(j["adaptive"], "options.adaptive");
    o.accelerate = decode_bool(j["accelerate"], "options.accelerate");
    o.restart = decode_bool(j["restart"], "options.restart");
    o.backtrack = decode_bool(j["backtrack"], "options.backtrack");
    o.tau = decode_optional(j["tau"], "options.tau");
    o.lipschitz = decode_optional(j["lipschitz"], "options.lipschitz");
    try {
        o.stop_rule = parse_stop_rule(decode_string(j["stop_rule"], "options.stop_rule"));
    } catch (const ConfigError &e) {
        schema_error("options.stop_rule", e.what());
    }
    o.string_header = decode_string(j["string_header"], "options.string_header");
    if (!j["seed"].is_number_unsigned())
        schema_error("options.seed", "expected a non-negative integer");
    o.seed = j["seed"].get<std::uint64_t>();
    o.monitor_supplied = decode_bool(j["monitor_supplied"], "options.monitor_supplied");
    o.stop_now_supplied = decode_bool(j["stop_now_supplied"], "options.stop_now_supplied");
    return o;
}

Trace decode_trace(const json &j) {
    expect_keys(j, "trace",
                {"solve_time", "iteration_count", "backtracks", "lipschitz_estimate", "initial_stepsize",
                 "residuals", "normalized_residuals", "stepsizes", "objective", "func_values", "iterates"});
    Trace t;
    t.solve_time = decode_double(j["solve_time"], "trace.solve_time");
    t.iteration_count = decode_long(j["iteration_count"], "trace.iteration_count");
    t.backtracks = decode_long(j["backtracks"], "trace.backtracks");
    t.lipschitz_estimate = decode_double(j["lipschitz_estimate"], "trace.lipschitz_estimate");
    t.initial_stepsize = decode_double(j["initial_stepsize"], "trace.initial_stepsize");
    t.residuals = decode_list(j["residuals"], "trace.residuals");
    t.normalized_residuals = decode_list(j["normalized_residuals"], "trace.normalized_residuals");
    t.stepsizes = decode_list(j["stepsizes"], "trace.stepsizes");
    t.objective = decode_list(j["objective"], "trace.objective");
    t.func_values = decode_list(j["func_values"], "trace.func_values");
    const auto &its = j["iterates"];
    if (!its.is_array())
        schema_error("trace.iterates", "expected an array");
    for (std::size_t i = 0; i < its.size(); ++i) {
        auto v = decode_list(its[i], "trace.iterates[" + std::to_string(i) + "]");
        t.iterates.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto n = static_cast<std::size_t>(std::max(t.iteration_count, 0L));
    auto check_length = [n](std::size_t size, const char *key, bool optional) {
        if (size != n && !(optional && size == 0))
            schema_error(key, "expected " + std::to_string(n) + " entries, got " + std::to_string(size));
    };
    check_length(t.residuals.size(), "trace.residuals", false);
    check_length(t.normalized_residuals.size(), "trace.normalized_residuals", false);
    check_length(t.stepsizes.size(), "trace.stepsizes", false);
    check_length(t.func_values.size(), "trace.func_values", false);
    check_length(t.objective.size(), "trace.objective", true);
    check_length(t.iterates.size(), "trace.iterates", true);
    return t;
}

ProblemDescriptor decode_problem(const json &j) {
    expect_keys(j, "problem", {"builder", "parameters", "settings", "data"});
    ProblemDescriptor p;
    p.builder = decode_string(j["builder"], "problem.builder");
    if (!j["parameters"].is_object())
        schema_error("problem.parameters", "expected an object");
    for (const auto &item : j["parameters"].items())
        p.parameters[item.key()] = decode_double(item.value(), "problem.parameters." + item.key());
    if (!j["settings"].is_object())
        schema_error("problem.settings", "expected an object");
    for (const auto &item : j["settings"].items())
        p.settings[item.key()] = decode_string(item.value(), "problem.settings." + item.key());
    if (!j["data"].is_object())
        schema_error("problem.data", "expected an object");
    for (const auto &item : j["data"].items())
        p.data[item.key()] = decode_string(item.value(), "problem.data." + item.key());
    return p;
}

std::string line_column(const std::string &text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

std::string format_run(const RunRecord &record) {
    json j;
    j["schema_version"] = kRunSchemaVersion;
    j["seed"] = record.seed;
    j["termination"] = std::string(to_string(record.termination));
    j["problem"] = encode(record.problem);
    j["options"] = encode(record.options);
    j["trace"] = encode(record.trace);
    return j.dump(2) + "\n";
}

std::string format_trace_csv(const Trace &trace) {
    const bool with_objective = !trace.objective.empty();
    std::string out = with_objective ? "iteration,residual,normalized_residual,stepsize,objective,func_value\n"
                                     : "iteration,residual,normalized_residual,stepsize,func_value\n";
    for (std::size_t i = 0; i < trace.residuals.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',' + format_double(trace.residuals[i]);
        out += ',' + format_double(trace.normalized_residuals.at(i));
        out += ',' + format_double(trace.stepsizes.at(i));
        if (with_objective)
            out += ',' + format_double(trace.objective.at(i));
        out += ',' + format_double(trace.func_values.at(i));
        out += '\n';
    }
    return out;
}

RunRecord parse_run(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError("run document: syntax error at " + line_column(text, e.byte) + ": " + e.what());
    }
    if (!j.is_object())
        schema_error("document", "expected an object");
    if (!j.contains("schema_version"))
        schema_error("document", "missing key 'schema_version'");
    if (!j["schema_version"].is_number_integer())
        schema_error("schema_version", "expected an integer");
    const long version = j["schema_version"].get<long>();
    if (version != kRunSchemaVersion)
        throw VersionError("run document schema_version " + std::to_string(version) + " is incompatible with " +
                           std::to_string(kRunSchemaVersion));
    expect_keys(j, "document", {"schema_version", "seed", "termination", "problem", "options", "trace"});
    RunRecord r;
    if (!j["seed"].is_number_unsigned())
        schema_error("seed", "expected a non-negative integer");
    r.seed = j["seed"].get<std::uint64_t>();
    r.termination = parse_termination(decode_string(j["termination"], "termination"));
    r.problem = decode_problem(j["problem"]);
    r.options = decode_options(j["options"]);
    r.trace = decode_trace(j["trace"]);
    return r;
}

std::filesystem::path trace_csv_path(const std::filesystem::path &path) {
    auto csv = path;
    csv.replace_extension(".csv");
    if (csv == path)
        csv += ".csv";
    return csv;
}

void write_run(const RunRecord &record, const std::filesystem::path &path) {
    write_file_bytes(path, format_run(record));
    write_file_bytes(trace_csv_path(path), format_trace_csv(record.trace));
}

RunRecord read_run(const std::filesystem::path &path) {
    const std::string text = read_file_bytes(path);
    try {
        return parse_run(text);
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace fasta
