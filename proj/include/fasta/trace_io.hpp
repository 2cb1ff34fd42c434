#pragma once

#include "fasta/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace fasta {

inline constexpr int kRunSchemaVersion = 1;

/// Serializable part of Options. Callbacks cannot be stored; only whether
/// they were supplied.
struct OptionsRecord {
    int verbose = 0;
    double tol = 1e-3;
    long max_iters = 1000;
    bool record_objective = false;
    bool record_iterates = false;
    bool adaptive = true;
    bool accelerate = false;
    bool restart = true;
    bool backtrack = true;
    std::optional<double> tau;
    std::optional<double> lipschitz;
    StopRule stop_rule = StopRule::hybrid_residual;
    std::string string_header;
    std::uint64_t seed = 0;
    bool monitor_supplied = false;
    bool stop_now_supplied = false;

    friend bool operator==(const OptionsRecord &, const OptionsRecord &) = default;
};

OptionsRecord snapshot(const Options &options);
/// Options with the recorded settings and no callbacks.
Options to_options(const OptionsRecord &record);

struct ProblemDescriptor {
    std::string builder;
    std::map<std::string, double> parameters;
    std::map<std::string, std::string> settings;
    /// data name -> SHA-256 of the exact bytes ingested.
    std::map<std::string, std::string> data;

    friend bool operator==(const ProblemDescriptor &, const ProblemDescriptor &) = default;
};

struct RunRecord {
    OptionsRecord options;
    Trace trace;
    Termination termination = Termination::max_iters;
    ProblemDescriptor problem;
    std::uint64_t seed = 0;
};

bool operator==(const Trace &a, const Trace &b);
bool operator==(const RunRecord &a, const RunRecord &b);

/// Run document as text (JSON, fixed key order, round-trip exact floats).
std::string format_run(const RunRecord &record);
/// Per-iteration CSV: iteration,residual,normalized_residual,stepsize[,objective],func_value.
std::string format_trace_csv(const Trace &trace);
/// Strict inverse of format_run. Throws ParseError (with line and column for
/// syntax errors, the key name for schema violations) or VersionError.
RunRecord parse_run(const std::string &text);

/// Sibling CSV path used by write_run: `path` with extension ".csv".
std::filesystem::path trace_csv_path(const std::filesystem::path &path);

/// Writes the run document to `path` and the trace CSV next to it.
void write_run(const RunRecord &record, const std::filesystem::path &path);
RunRecord read_run(const std::filesystem::path &path);

class VersionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fasta
