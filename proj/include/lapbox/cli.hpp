#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

inline constexpr const char* tool_version = "1.0.0";

// Scalar cell of a report: every parameter, metadata entry and table cell is
// one of these four shapes, so the emitters can render any scenario without
// per-scenario code.
using Value = std::variant<bool, long long, double, std::string>;

// Named block of rows sharing one column layout. An empty block still carries
// its header so downstream readers learn the schema.
struct ResultTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
};

// Complete report of one scenario run: the resolved parameters with defaults
// filled in, the result tables, and the run metadata (tool version, seed,
// wall time, quadrature residuals, pass flags). `passed` drives the process
// exit code: 0 when every configured check held, 1 otherwise.
struct ResultEnvelope {
    std::string scenario;
    std::vector<std::pair<std::string, Value>> params;
    std::vector<ResultTable> results;
    std::vector<std::pair<std::string, Value>> metadata;
    bool passed = true;
};

// Flat key = value configuration with dotted section names. Keys consumed by
// typed reads are tracked, so after a scenario has read its parameter subset
// any leftover key is reported as unknown instead of silently ignored.
class ScenarioConfig {
public:
    ScenarioConfig() = default;

    static ScenarioConfig from_file(const std::string& path);
    static ScenarioConfig from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    // Raw string access; marks the key consumed, throws when absent.
    const std::string& raw(const std::string& key) const;
    std::vector<std::string> unconsumed() const;
    void reject_unconsumed(const std::string& scenario) const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

// Typed parameter access that echoes every resolved value, defaults included,
// into the envelope's parameter block; the emitted report therefore lists the
// exact settings the run used. Lists echo in a canonical comma/semicolon form.
class ParamReader {
public:
    ParamReader(const ScenarioConfig& config, ResultEnvelope& env)
        : config_(config), env_(env) {}

    long long require_int(const std::string& key);
    long long get_int(const std::string& key, long long fallback);
    double require_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::string require_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);

    std::vector<double> require_double_list(const std::string& key);
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback);
    std::vector<long> get_int_list(const std::string& key, const std::vector<long>& fallback);
    // tuples separated by ';', components by ','
    std::vector<std::vector<long>> get_int_tuple_list(const std::string& key,
                                                      const std::vector<std::vector<long>>& fallback);

    bool key_present(const std::string& key) const { return config_.has(key); }
    // Record a derived parameter that did not come from the config file.
    void note(const std::string& key, Value v);
    // Replace an already echoed value (command-line overrides).
    void override_note(const std::string& key, Value v);

private:
    const ScenarioConfig& config_;
    ResultEnvelope& env_;
};

// Command-line overrides; unset fields defer to the config keys `seed` and
// `threads`, then to the defaults 1 and 1.
struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

// Seed and worker budget a scenario runs under. Per-task seeds derive from
// the master seed by counter splitting, so adding tasks never reshuffles the
// streams of existing ones.
struct RunContext {
    std::uint64_t seed = 1;
    int threads = 1;

    std::uint64_t task_seed(std::uint64_t index) const;
};

const std::vector<std::string>& scenario_names();

ResultEnvelope run_scenario(const std::string& scenario, const ScenarioConfig& config,
                            const RunOptions& options = {});

// Single JSON object {scenario, params, results, metadata} with stable key
// order; numbers are printed so that parsing the text reproduces them exactly.
std::string emit_json(const ResultEnvelope& env);

// One RFC 4180 table: header row, then one line per row, 17 significant
// digits for floating-point cells. An empty table emits the header only.
std::string emit_csv(const ResultTable& table);

// Every block of the envelope as (name, csv) pairs: `params`, each result
// table in order, `metadata`. Key-value blocks render as two-column tables.
std::vector<std::pair<std::string, std::string>> emit_csv_blocks(const ResultEnvelope& env);

// Write through a temporary file in the same directory plus a rename, so a
// crash never leaves a half-written report at the target path.
void write_file_atomic(const std::string& path, const std::string& content);

// Full command-line entry point: parse arguments, load the config, run the
// scenario and write the report. Exit codes: 0 pass, 1 a configured numeric
// check failed, 2 configuration error, 3 runtime or budget error.
int run_main(int argc, const char* const* argv);

}  // namespace lapbox
