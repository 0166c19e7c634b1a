#include "lapbox/cli.hpp"

#include <algorithm>
#include <atomic>
#include <boost/rational.hpp>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lapbox/birman.hpp"
#include "lapbox/evolution.hpp"
#include "lapbox/lattice.hpp"
#include "lapbox/operators.hpp"
#include "lapbox/opnorm.hpp"
#include "lapbox/oscillatory.hpp"
#include "lapbox/resolvent.hpp"
#include "lapbox/scattering.hpp"
#include "lapbox/symbols.hpp"

namespace lapbox {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(trim(current));
    return parts;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-')
            return false;
    return true;
}

long long parse_ll(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected an integer, got '" + t + "'");
    }
    if (used != t.size())
        throw config_error("config key '" + key + "': expected an integer, got '" + t + "'");
    return v;
}

double parse_dbl(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    // a/b division is accepted so exponents like 4/3 keep their intent visible
    const std::size_t slash = t.find('/');
    if (slash != std::string::npos && slash > 0 && slash + 1 < t.size()) {
        const double num = parse_dbl(key, t.substr(0, slash));
        const double den = parse_dbl(key, t.substr(slash + 1));
        if (den == 0.0) throw config_error("config key '" + key + "': division by zero");
        return num / den;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': expected a number, got '" + t + "'");
    }
    if (used != t.size() || !std::isfinite(v))
        throw config_error("config key '" + key + "': expected a finite number, got '" + t + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw config_error("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::string canon_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_g17(v[i]);
    }
    return out;
}

std::string canon_list(const std::vector<long>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string canon_tuples(const std::vector<std::vector<long>>& tuples) {
    std::string out;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        if (i) out += "; ";
        out += canon_list(tuples[i]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration file

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!valid_key(key))
            throw config_error("config line " + std::to_string(line_no) + ": invalid key '" +
                               key + "'");
        if (!cfg.values_.emplace(key, value).second)
            throw config_error("config line " + std::to_string(line_no) + ": duplicate key '" +
                               key + "'");
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

const std::string& ScenarioConfig::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw config_error("missing config key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::vector<std::string> ScenarioConfig::unconsumed() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
        if (!consumed_.count(key)) out.push_back(key);
    return out;
}

void ScenarioConfig::reject_unconsumed(const std::string& scenario) const {
    const std::vector<std::string> leftover = unconsumed();
    if (leftover.empty()) return;
    std::string names;
    for (std::size_t i = 0; i < leftover.size(); ++i) {
        if (i) names += ", ";
        names += "'" + leftover[i] + "'";
    }
    throw config_error("scenario '" + scenario + "' does not use config key(s) " + names);
}

// ---------------------------------------------------------------------------
// typed parameter access

void ParamReader::note(const std::string& key, Value v) {
    env_.params.emplace_back(key, std::move(v));
}

void ParamReader::override_note(const std::string& key, Value v) {
    for (auto& entry : env_.params) {
        if (entry.first == key) {
            entry.second = std::move(v);
            return;
        }
    }
    env_.params.emplace_back(key, std::move(v));
}

long long ParamReader::require_int(const std::string& key) {
    if (!config_.has(key))
        throw config_error("scenario '" + env_.scenario + "': missing required config key '" +
                           key + "'");
    const long long v = parse_ll(key, config_.raw(key));
    note(key, v);
    return v;
}

long long ParamReader::get_int(const std::string& key, long long fallback) {
    const long long v = config_.has(key) ? parse_ll(key, config_.raw(key)) : fallback;
    note(key, v);
    return v;
}

double ParamReader::require_double(const std::string& key) {
    if (!config_.has(key))
        throw config_error("scenario '" + env_.scenario + "': missing required config key '" +
                           key + "'");
    const double v = parse_dbl(key, config_.raw(key));
    note(key, v);
    return v;
}

double ParamReader::get_double(const std::string& key, double fallback) {
    const double v = config_.has(key) ? parse_dbl(key, config_.raw(key)) : fallback;
    note(key, v);
    return v;
}

bool ParamReader::get_bool(const std::string& key, bool fallback) {
    const bool v = config_.has(key) ? parse_bool(key, config_.raw(key)) : fallback;
    note(key, v);
    return v;
}

std::string ParamReader::require_string(const std::string& key) {
    if (!config_.has(key))
        throw config_error("scenario '" + env_.scenario + "': missing required config key '" +
                           key + "'");
    const std::string v = trim(config_.raw(key));
    note(key, v);
    return v;
}

std::string ParamReader::get_string(const std::string& key, const std::string& fallback) {
    const std::string v = config_.has(key) ? trim(config_.raw(key)) : fallback;
    note(key, v);
    return v;
}

std::vector<double> ParamReader::require_double_list(const std::string& key) {
    if (!config_.has(key))
        throw config_error("scenario '" + env_.scenario + "': missing required config key '" +
                           key + "'");
    std::vector<double> out;
    for (const std::string& part : split(config_.raw(key), ',')) {
        if (part.empty())
            throw config_error("config key '" + key + "': empty list entry");
        out.push_back(parse_dbl(key, part));
    }
    note(key, canon_list(out));
    return out;
}

std::vector<double> ParamReader::get_double_list(const std::string& key,
                                                 const std::vector<double>& fallback) {
    if (!config_.has(key)) {
        note(key, canon_list(fallback));
        return fallback;
    }
    return require_double_list(key);
}

std::vector<long> ParamReader::get_int_list(const std::string& key,
                                            const std::vector<long>& fallback) {
    if (!config_.has(key)) {
        note(key, canon_list(fallback));
        return fallback;
    }
    std::vector<long> out;
    for (const std::string& part : split(config_.raw(key), ',')) {
        if (part.empty())
            throw config_error("config key '" + key + "': empty list entry");
        out.push_back(static_cast<long>(parse_ll(key, part)));
    }
    note(key, canon_list(out));
    return out;
}

std::vector<std::vector<long>> ParamReader::get_int_tuple_list(
    const std::string& key, const std::vector<std::vector<long>>& fallback) {
    if (!config_.has(key)) {
        note(key, canon_tuples(fallback));
        return fallback;
    }
    std::vector<std::vector<long>> out;
    for (const std::string& tuple : split(config_.raw(key), ';')) {
        if (tuple.empty())
            throw config_error("config key '" + key + "': empty tuple entry");
        std::vector<long> point;
        for (const std::string& part : split(tuple, ','))
            point.push_back(static_cast<long>(parse_ll(key, part)));
        out.push_back(std::move(point));
    }
    note(key, canon_tuples(out));
    return out;
}

// ---------------------------------------------------------------------------
// per-task seeding and the ordered concurrent map

std::uint64_t RunContext::task_seed(std::uint64_t index) const {
    // splitmix64 step on the counter-shifted master seed
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// Runs fn(0..n-1) on up to `threads` workers. Each index owns its output slot
// at the call site, so results are reduced in index order no matter how the
// scheduler interleaves the workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = static_cast<int>(
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        std::size_t i;
        while (!stop.load(std::memory_order_relaxed) &&
               (i = next.fetch_add(1)) < n) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                stop.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 0; w + 1 < workers; ++w) pool.emplace_back(body);
    body();
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// shared parameter blocks

int read_dimension(ParamReader& in, int max_d = 4) {
    const long long d = in.require_int("d");
    if (d < 1 || d > max_d)
        throw config_error("config key 'd': dimension must be between 1 and " +
                           std::to_string(max_d));
    return static_cast<int>(d);
}

HalfPlane read_side(ParamReader& in) {
    const std::string side = in.get_string("side", "upper");
    if (side == "upper") return HalfPlane::upper;
    if (side == "lower") return HalfPlane::lower;
    throw config_error("config key 'side': expected upper | lower, got '" + side + "'");
}

QuadratureSpec read_quadrature(ParamReader& in) {
    QuadratureSpec spec;
    const std::string engine = in.get_string("quad.engine", "automatic");
    if (engine == "automatic")
        spec.engine = GreenEngine::automatic;
    else if (engine == "torus_grid")
        spec.engine = GreenEngine::torus_grid;
    else if (engine == "time_integral")
        spec.engine = GreenEngine::time_integral;
    else if (engine == "laplace_transform")
        spec.engine = GreenEngine::laplace_transform;
    else
        throw config_error(
            "config key 'quad.engine': unknown engine '" + engine +
            "', expected automatic | torus_grid | time_integral | laplace_transform");
    spec.tol = in.get_double("quad.tol", 1e-9);
    if (!(spec.tol > 0.0)) throw config_error("config key 'quad.tol': must be positive");
    spec.n_per_axis = static_cast<long>(in.get_int("quad.n_per_axis", 0));
    if (spec.n_per_axis < 0)
        throw config_error("config key 'quad.n_per_axis': must be nonnegative");
    spec.mesh_safety = in.get_double("quad.mesh_safety", 32.0);
    if (!(spec.mesh_safety > 0.0))
        throw config_error("config key 'quad.mesh_safety': must be positive");
    spec.eps0 = in.get_double("quad.eps0", 0.0);
    if (spec.eps0 < 0.0) throw config_error("config key 'quad.eps0': must be nonnegative");
    spec.richardson_stages = static_cast<int>(in.get_int("quad.richardson_stages", 2));
    if (spec.richardson_stages < 0 || spec.richardson_stages > 12)
        throw config_error("config key 'quad.richardson_stages': must be between 0 and 12");
    spec.max_grid_points = static_cast<long>(in.get_int("quad.max_grid_points", 1L << 24));
    if (spec.max_grid_points <= 0)
        throw config_error("config key 'quad.max_grid_points': must be positive");
    return spec;
}

Potential read_potential(ParamReader& in, int d) {
    const std::string kind = in.get_string("potential.kind", "delta");
    const double threshold = in.get_double("potential.threshold", 1e-10);
    std::vector<std::pair<std::vector<long>, double>> sites;
    if (kind == "none") {
        // empty support, the free operator
    } else if (kind == "delta") {
        const double strength = in.require_double("potential.strength");
        sites.emplace_back(std::vector<long>(static_cast<std::size_t>(d), 0), strength);
    } else if (kind == "sites") {
        const std::string text = in.require_string("potential.sites");
        for (const std::string& tuple : split(text, ';')) {
            if (tuple.empty())
                throw config_error("config key 'potential.sites': empty entry");
            const std::vector<std::string> parts = split(tuple, ',');
            if (static_cast<int>(parts.size()) != d + 1)
                throw config_error(
                    "config key 'potential.sites': each entry needs " + std::to_string(d) +
                    " coordinates and a value, got '" + tuple + "'");
            std::vector<long> x;
            for (int a = 0; a < d; ++a)
                x.push_back(static_cast<long>(parse_ll("potential.sites", parts[a])));
            sites.emplace_back(std::move(x),
                               parse_dbl("potential.sites", parts[static_cast<std::size_t>(d)]));
        }
    } else {
        throw config_error("config key 'potential.kind': expected none | delta | sites, got '" +
                           kind + "'");
    }
    return Potential(d, sites, threshold);
}

std::vector<std::vector<long>> read_points(ParamReader& in, int d) {
    const std::vector<std::vector<long>> fallback{std::vector<long>(static_cast<std::size_t>(d), 0)};
    std::vector<std::vector<long>> points = in.get_int_tuple_list("points", fallback);
    for (const std::vector<long>& x : points)
        if (static_cast<int>(x.size()) != d)
            throw config_error("config key 'points': every point needs exactly " +
                               std::to_string(d) + " coordinates");
    return points;
}

std::vector<std::string> coordinate_columns(int d) {
    std::vector<std::string> cols;
    for (int a = 1; a <= d; ++a) cols.push_back("x" + std::to_string(a));
    return cols;
}

ResultTable& add_table(ResultEnvelope& env, std::string name, std::vector<std::string> columns) {
    // runners hold references to earlier tables while filling later ones, so
    // the block list must never reallocate; no scenario emits more than eight
    if (env.results.capacity() < 8) env.results.reserve(8);
    env.results.push_back(ResultTable{std::move(name), std::move(columns), {}});
    return env.results.back();
}

void meta(ResultEnvelope& env, const std::string& key, Value v) {
    env.metadata.emplace_back(key, std::move(v));
}

Value vi(long long x) { return Value(x); }
Value vi(std::size_t x) { return Value(static_cast<long long>(x)); }
Value vi(long x) { return Value(static_cast<long long>(x)); }
Value vi(int x) { return Value(static_cast<long long>(x)); }

// ---------------------------------------------------------------------------
// scenario runners

void run_green(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const double z_re = in.require_double("z_re");
    const double z_im = in.get_double("z_im", 0.0);
    const std::vector<std::vector<long>> points = read_points(in, d);
    const QuadratureSpec quad = read_quadrature(in);
    const double residual_cap = in.get_double("check.residual_cap", 1e-6);

    double residual = 0.0;
    const std::vector<cplx> values =
        green_values(d, points, SpectralPoint::from(cplx(z_re, z_im)), quad, &residual);

    std::vector<std::string> cols = coordinate_columns(d);
    cols.insert(cols.end(), {"value_re", "value_im", "abs_value"});
    ResultTable& table = add_table(env, "green_values", cols);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Value> row;
        for (long c : points[i]) row.push_back(vi(c));
        row.emplace_back(values[i].real());
        row.emplace_back(values[i].imag());
        row.emplace_back(std::abs(values[i]));
        table.rows.push_back(std::move(row));
    }
    meta(env, "residual_estimate", residual);
    env.passed = residual <= residual_cap;
}

void run_lap(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const std::vector<double> lambdas = in.require_double_list("lambdas");
    const HalfPlane side = read_side(in);
    const std::vector<std::vector<long>> points = read_points(in, d);
    const QuadratureSpec quad = read_quadrature(in);
    const double residual_cap = in.get_double("check.residual_cap", 1e-6);

    const BoundaryValuesMulti bv = limiting_absorption_multi(d, points, lambdas, side, quad);

    std::vector<std::string> cols{"lambda"};
    const std::vector<std::string> xcols = coordinate_columns(d);
    cols.insert(cols.end(), xcols.begin(), xcols.end());
    cols.insert(cols.end(), {"value_re", "value_im"});
    ResultTable& values = add_table(env, "boundary_values", cols);
    ResultTable& conv = add_table(env, "convergence", {"lambda", "residual", "diverged"});

    double max_residual = 0.0;
    bool any_diverged = false;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const BoundaryValues& one = bv.per_lambda[li];
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::vector<Value> row{Value(lambdas[li])};
            for (long c : points[i]) row.push_back(vi(c));
            row.emplace_back(one.values[i].real());
            row.emplace_back(one.values[i].imag());
            values.rows.push_back(std::move(row));
        }
        conv.rows.push_back({Value(lambdas[li]), Value(one.residual), Value(one.diverged)});
        max_residual = std::max(max_residual, one.residual);
        any_diverged = any_diverged || one.diverged;
    }
    meta(env, "max_residual", max_residual);
    meta(env, "any_diverged", any_diverged);
    meta(env, "eps_schedule", canon_list(bv.eps_schedule));
    env.passed = !any_diverged && max_residual <= residual_cap;
}

void run_decay(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const double lambda = in.require_double("lambda");
    const double eps = in.get_double("eps", 0.0);
    const HalfPlane side = read_side(in);
    std::vector<long> fallback_dir(static_cast<std::size_t>(d), 0);
    fallback_dir[0] = 1;
    const std::vector<long> direction = in.get_int_list("direction", fallback_dir);
    if (static_cast<int>(direction.size()) != d)
        throw config_error("config key 'direction': needs exactly " + std::to_string(d) +
                           " components");
    const long r_lo = static_cast<long>(in.get_int("r_lo", 8));
    const long r_hi = static_cast<long>(in.get_int("r_hi", 64));
    const double max_rms = in.get_double("max_rms", 0.2);
    const QuadratureSpec quad = read_quadrature(in);
    const double exp_lo = in.get_double("check.exponent_lo", -1e9);
    const double exp_hi = in.get_double("check.exponent_hi", 1e9);

    const KernelDecayResult res =
        kernel_decay_fit(d, SpectralPoint(lambda, eps, side), direction, r_lo, r_hi, quad, max_rms);

    ResultTable& table = add_table(
        env, "decay", {"abs_x", "value_re", "value_im", "log_abs", "fit_exponent", "fit_residual"});
    for (std::size_t i = 0; i < res.radii.size(); ++i) {
        table.rows.push_back({Value(res.radii[i]), Value(res.values[i].real()),
                              Value(res.values[i].imag()), Value(std::log(std::abs(res.values[i]))),
                              Value(res.fit.exponent), Value(res.fit.rms_residual)});
    }
    meta(env, "accepted", res.accepted);
    meta(env, "reason", res.reason);
    meta(env, "fit_exponent", res.fit.exponent);
    meta(env, "fit_prefactor", res.fit.prefactor);
    meta(env, "fit_rms_residual", res.fit.rms_residual);
    meta(env, "boundary_residual", res.boundary_residual);
    meta(env, "diverged", res.diverged);
    env.passed = res.accepted && !res.diverged && res.fit.exponent >= exp_lo &&
                 res.fit.exponent <= exp_hi;
}

void run_dispersive(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const double t_lo = in.get_double("t_lo", 20.0);
    const double t_hi = in.get_double("t_hi", 200.0);
    const int samples = static_cast<int>(in.get_int("samples", 8));
    const double grid_scale = in.get_double("grid_scale", 1.0);
    const double exp_lo = in.get_double("check.exponent_lo", -1e9);
    const double exp_hi = in.get_double("check.exponent_hi", 1e9);

    const DispersiveFit fit = dispersive_decay_fit(d, t_lo, t_hi, samples, grid_scale);

    ResultTable& table = add_table(env, "dispersive", {"time", "sup_norm"});
    for (std::size_t i = 0; i < fit.times.size(); ++i)
        table.rows.push_back({Value(fit.times[i]), Value(fit.sup_norms[i])});
    meta(env, "fit_exponent", fit.fit.exponent);
    meta(env, "fit_prefactor", fit.fit.prefactor);
    meta(env, "fit_rms_residual", fit.fit.rms_residual);
    env.passed = fit.fit.exponent >= exp_lo && fit.fit.exponent <= exp_hi;
}

void run_opnorm(ParamReader& in, const RunContext& ctx, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const double lambda = in.require_double("lambda");
    const HalfPlane side = read_side(in);
    const long box_half = static_cast<long>(in.require_int("box_half"));
    if (box_half < 1) throw config_error("config key 'box_half': must be at least 1");
    const double p = in.get_double("p", 2.0);
    const double q = in.get_double("q", 2.0);
    const std::vector<double> eps_list = in.require_double_list("eps_list");
    for (double e : eps_list)
        if (!(e > 0.0))
            throw config_error("config key 'eps_list': every entry must be positive");
    const int restarts = static_cast<int>(in.get_int("restarts", 8));
    const int max_iterations = static_cast<int>(in.get_int("max_iterations", 200));
    const QuadratureSpec quad = read_quadrature(in);
    const double pq_change_max = in.get_double("check.pq_change_max", 1e9);
    const double l22_growth_min = in.get_double("check.l22_growth_min", 0.0);

    const LatticeBox box(d, box_half);
    ResultTable& table = add_table(env, "norms", {"eps", "norm_pq", "norm_22", "residual"});
    std::vector<double> norms_pq, norms_22;
    double worst_residual = 0.0;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        double residual = 0.0;
        const ConvolutionOperator op =
            green_operator(d, box, SpectralPoint(lambda, eps_list[i], side), quad, &residual);
        const NormEstimate n_pq =
            opnorm_lower(op, p, q, restarts, ctx.task_seed(2 * i), nullptr, max_iterations);
        const NormEstimate n_22 =
            opnorm_lower(op, 2.0, 2.0, restarts, ctx.task_seed(2 * i + 1), nullptr, max_iterations);
        norms_pq.push_back(n_pq.value);
        norms_22.push_back(n_22.value);
        worst_residual = std::max(worst_residual, residual);
        table.rows.push_back(
            {Value(eps_list[i]), Value(n_pq.value), Value(n_22.value), Value(residual)});
    }

    double pq_change = 0.0;
    double l22_growth = 1.0;
    if (eps_list.size() >= 2) {
        pq_change = std::fabs(norms_pq.back() - norms_pq.front()) / norms_pq.front();
        l22_growth = norms_22.back() / norms_22.front();
    }
    meta(env, "pq_rel_change", pq_change);
    meta(env, "l22_growth", l22_growth);
    meta(env, "max_residual", worst_residual);
    env.passed = pq_change <= pq_change_max && l22_growth >= l22_growth_min;
}

void run_assumptions(ParamReader& in, const RunContext& ctx, ResultEnvelope& env) {
    const int d = read_dimension(in);
    if (d < 2)
        throw config_error("config key 'd': the slicing constants need d >= 2");
    const double lambda = in.require_double("lambda");
    const double eps = in.get_double("eps", 0.05);
    const HalfPlane side = read_side(in);
    const long box_half = static_cast<long>(in.require_int("box_half"));
    if (box_half < 1) throw config_error("config key 'box_half': must be at least 1");
    const double decay_k = in.get_double("decay_k", curvature_decay_order(d));
    const std::string which_name = in.get_string("which", "duality_line");
    BoundKind which = BoundKind::duality_line;
    if (which_name == "duality_line")
        which = BoundKind::duality_line;
    else if (which_name == "local_smoothing")
        which = BoundKind::local_smoothing;
    else if (which_name == "off_duality")
        which = BoundKind::off_duality;
    else
        throw config_error(
            "config key 'which': expected duality_line | local_smoothing | off_duality, got '" +
            which_name + "'");
    // the default probe sits at the endpoint exponent the decay order admits,
    // paired with the partner exponent the bound kind dictates
    const double p = in.get_double("p", 2.0 * (decay_k + 1.0) / (decay_k + 2.0));
    double q = 0.0;
    if (in.key_present("q")) {
        const std::string q_text = in.get_string("q", "");
        q = q_text == "inf" ? std::numeric_limits<double>::infinity() : parse_dbl("q", q_text);
    } else if (which == BoundKind::local_smoothing) {
        q = 2.0;
        in.note("q", q);
    } else if (p > 1.0) {
        q = p / (p - 1.0);
        in.note("q", q);
    } else {
        q = std::numeric_limits<double>::infinity();
        in.note("q", std::string("inf"));
    }
    const int trials = static_cast<int>(in.get_int("trials", 8));
    const int samples = static_cast<int>(in.get_int("samples", 100));
    const QuadratureSpec quad = read_quadrature(in);
    const double max_ratio_cap = in.get_double("check.max_ratio_cap", 1e9);

    const LatticeBox box(d, box_half);
    double residual = 0.0;
    bool diverged = false;
    // off the axis the section is a plain kernel evaluation; on the axis the
    // boundary extrapolation supplies the values
    const ConvolutionOperator op =
        eps > 0.0 ? green_operator(d, box, SpectralPoint(lambda, eps, side), quad, &residual)
                  : green_boundary_operator(d, box, lambda, side, quad, &residual, &diverged);

    const AssumptionConstants constants = measure_constants(op, decay_k);
    const BoundReport bound =
        verify_bound(op, constants, p, q, decay_k, which, trials, ctx.task_seed(0));
    const InterpolationCheck interp =
        riesz_thorin_check(op, constants, decay_k, samples, ctx.task_seed(1));

    ResultTable& ctable = add_table(env, "constants", {"c0", "c1", "c2", "c3", "c4", "decay_k"});
    ctable.rows.push_back({Value(constants.C0), Value(constants.C1), Value(constants.C2),
                           Value(constants.C3), Value(constants.C4), Value(constants.k)});
    ResultTable& btable = add_table(env, "bound_check", {"trial", "ratio"});
    for (std::size_t i = 0; i < bound.ratios.size(); ++i)
        btable.rows.push_back({vi(i), Value(bound.ratios[i])});
    ResultTable& itable = add_table(env, "interpolation", {"samples", "violations", "worst_margin"});
    itable.rows.push_back({vi(interp.samples), vi(interp.violations), Value(interp.worst_margin)});

    meta(env, "case_index", vi(bound.case_index));
    meta(env, "c_combination", bound.c_combination);
    meta(env, "max_ratio", bound.max_ratio);
    meta(env, "residual", residual);
    meta(env, "diverged", diverged);
    env.passed = interp.violations == 0 && bound.max_ratio <= max_ratio_cap && !diverged;
}

void run_bs_scan(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const Potential v = read_potential(in, d);
    const HalfPlane side = read_side(in);
    std::vector<double> grid;
    if (in.key_present("lambdas")) {
        grid = in.require_double_list("lambdas");
    } else {
        const double lo = in.require_double("lambda_lo");
        const double hi = in.require_double("lambda_hi");
        const long long count = in.require_int("lambda_count");
        if (!(hi > lo) || count < 2)
            throw config_error(
                "config keys 'lambda_lo' / 'lambda_hi' / 'lambda_count': need lo < hi and at "
                "least 2 grid points");
        for (long long i = 0; i < count; ++i)
            grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1));
    }
    const double threshold = in.get_double("threshold", 1e-3);
    const int refine_levels = static_cast<int>(in.get_int("refine_levels", 2));
    const QuadratureSpec quad = read_quadrature(in);
    const double floor_min = in.get_double("check.floor_min", -1.0);
    const bool require_dips = in.get_bool("check.require_dips", false);

    const ScanResult res = bs_scan(v, grid, side, quad, threshold, refine_levels);

    ResultTable& scan = add_table(env, "scan", {"lambda", "min_singular"});
    for (std::size_t i = 0; i < res.grid.size(); ++i)
        scan.rows.push_back({Value(res.grid[i]), Value(res.min_singular[i])});
    ResultTable& dips =
        add_table(env, "dips", {"lambda", "value", "refined_lambda", "refined_value"});
    for (const ScanDip& dip : res.dips)
        dips.rows.push_back({Value(dip.lambda), Value(dip.value), Value(dip.refined_lambda),
                             Value(dip.refined_value)});

    meta(env, "n_dips", vi(res.dips.size()));
    meta(env, "max_residual", res.max_residual);
    meta(env, "any_diverged", res.any_diverged);

    bool ok = !res.any_diverged;
    if (floor_min >= 0.0)
        for (double s : res.min_singular) ok = ok && s >= floor_min;
    if (require_dips) {
        ok = ok && !res.dips.empty();
        // a dip must survive refinement, not dissolve into quadrature noise
        for (const ScanDip& dip : res.dips) ok = ok && dip.refined_value < threshold;
    }
    env.passed = ok;
}

void run_bound_states(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const Potential v = read_potential(in, d);
    const double root_tol = in.get_double("root_tol", 1e-10);
    const long dense_half = static_cast<long>(in.get_int("dense_half", 0));
    const double edge_gap = in.get_double("edge_gap", 1e-3);
    const double sensitivity_target = in.get_double("sensitivity_target", 1e-8);
    const QuadratureSpec quad = read_quadrature(in);
    const std::vector<double> expected = in.get_double_list("check.energies", {});
    const double energy_tol = in.get_double("check.energy_tol", 1e-6);
    const double mismatch_max = in.get_double("check.mismatch_max", 1e9);
    const long long expected_count = in.get_int("check.count", -1);

    const BoundStates bs = bound_states(v, quad, root_tol, dense_half, edge_gap,
                                        sensitivity_target);

    ResultTable& energies = add_table(env, "energies", {"index", "energy"});
    for (std::size_t i = 0; i < bs.energies.size(); ++i)
        energies.rows.push_back({vi(i), Value(bs.energies[i])});
    ResultTable& dense = add_table(env, "dense_check", {"index", "energy"});
    for (std::size_t i = 0; i < bs.dense_energies.size(); ++i)
        dense.rows.push_back({vi(i), Value(bs.dense_energies[i])});

    meta(env, "max_mismatch", bs.max_mismatch);
    meta(env, "dense_half", vi(bs.dense_half));
    meta(env, "boundary_sensitivity", bs.boundary_sensitivity);
    meta(env, "monotone_search", bs.monotone_search);

    bool ok = bs.max_mismatch <= mismatch_max;
    if (expected_count >= 0)
        ok = ok && static_cast<long long>(bs.energies.size()) == expected_count;
    for (double e : expected) {
        double best = 1e300;
        for (double found : bs.energies) best = std::min(best, std::fabs(found - e));
        ok = ok && best <= energy_tol;
    }
    env.passed = ok;
}

void run_holder(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const Potential v = read_potential(in, d);
    const double lambda0 = in.require_double("lambda0");
    const HalfPlane side = read_side(in);
    std::vector<double> separations;
    if (in.key_present("separations")) {
        separations = in.require_double_list("separations");
    } else {
        const double lo = in.get_double("sep_lo", 1e-3);
        const double hi = in.get_double("sep_hi", 1e-1);
        const long long count = in.get_int("sep_count", 7);
        if (!(lo > 0.0) || !(hi > lo) || count < 2)
            throw config_error(
                "config keys 'sep_lo' / 'sep_hi' / 'sep_count': need 0 < lo < hi and at least "
                "2 separations");
        for (long long i = 0; i < count; ++i)
            separations.push_back(lo * std::pow(hi / lo, static_cast<double>(i) /
                                                             static_cast<double>(count - 1)));
        in.note("separations", canon_list(separations));
    }
    const double p_shape = in.get_double("p", 1.0);
    const double delta = in.get_double("delta", 1.0);
    const double max_rms = in.get_double("max_rms", 0.2);
    const QuadratureSpec quad = read_quadrature(in);
    const double slope_min = in.get_double("check.slope_min", -1e9);

    const HolderReport rep =
        holder_fit(v, lambda0, side, separations, p_shape, delta, quad, max_rms);

    ResultTable& table = add_table(env, "holder", {"separation", "difference"});
    for (std::size_t i = 0; i < rep.separations.size(); ++i)
        table.rows.push_back({Value(rep.separations[i]), Value(rep.differences[i])});
    meta(env, "slope", rep.fit.exponent);
    meta(env, "prefactor", rep.fit.prefactor);
    meta(env, "rms_residual", rep.fit.rms_residual);
    meta(env, "beta_target", rep.beta_target);
    meta(env, "accepted", rep.accepted);
    meta(env, "max_residual", rep.max_residual);
    env.passed = rep.accepted && rep.fit.exponent >= slope_min;
}

WavePacket read_packet(ParamReader& in, int d) {
    const std::vector<double> center = in.require_double_list("packet.center");
    if (static_cast<int>(center.size()) != d)
        throw config_error("config key 'packet.center': needs exactly " + std::to_string(d) +
                           " components");
    const double sigma = in.get_double("packet.sigma", 6.0);
    const double radius = in.require_double("packet.radius");
    const long half_width = static_cast<long>(in.get_int("packet.half_width", 0));
    const double mass_tol = in.get_double("packet.mass_tol", 1e-8);
    const double min_clearance = in.get_double("packet.min_clearance", 0.25);
    return gaussian_packet(d, center, sigma, radius, half_width, mass_tol, min_clearance);
}

WaveBudget read_wave_budget(ParamReader& in) {
    WaveBudget budget;
    budget.tol = in.get_double("wave.tol", 1e-10);
    if (!(budget.tol > 0.0)) throw config_error("config key 'wave.tol': must be positive");
    budget.extra_half = static_cast<long>(in.get_int("wave.extra_half", 0));
    const long long max_sites = in.get_int("wave.max_sites", 1LL << 22);
    if (max_sites < 1) throw config_error("config key 'wave.max_sites': must be positive");
    budget.max_sites = static_cast<std::size_t>(max_sites);
    return budget;
}

void run_wave(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const Potential v = read_potential(in, d);
    const WavePacket packet = read_packet(in, d);
    const std::vector<double> times = in.require_double_list("times");
    const double it = in.get_double("intertwine.t", 16.0);
    const double is = in.get_double("intertwine.s", 4.0);
    const WaveBudget budget = read_wave_budget(in);
    const double intertwine_max = in.get_double("check.intertwine_max", 1e9);
    const bool increments_halve = in.get_bool("check.increments_halve", false);

    const WaveTrace trace = wave_apply(v, packet, times, budget);
    const double intertwine = intertwining_check(v, packet, it, is, budget);

    ResultTable& states = add_table(env, "wave_trace", {"time", "norm"});
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        states.rows.push_back({Value(trace.times[i]), Value(trace.norms[i])});
    ResultTable& incs = add_table(env, "increments", {"t_from", "t_to", "increment"});
    for (std::size_t i = 0; i < trace.increments.size(); ++i)
        incs.rows.push_back(
            {Value(trace.times[i]), Value(trace.times[i + 1]), Value(trace.increments[i])});

    double norm_drift = 0.0;
    for (double n : trace.norms) norm_drift = std::max(norm_drift, std::fabs(n - 1.0));
    meta(env, "intertwining_residual", intertwine);
    meta(env, "certified_tail", trace.certified_tail);
    meta(env, "box_half", vi(trace.box_half));
    meta(env, "norm_drift", norm_drift);
    meta(env, "packet_outside_mass", packet.outside_mass);
    meta(env, "packet_clearance", packet.clearance);

    bool ok = intertwine <= intertwine_max;
    if (increments_halve)
        for (std::size_t i = 0; i + 1 < trace.increments.size(); ++i)
            ok = ok && trace.increments[i + 1] <= 0.5 * trace.increments[i];
    env.passed = ok;
}

void run_complete(ParamReader& in, const RunContext&, ResultEnvelope& env) {
    const int d = read_dimension(in);
    const Potential v = read_potential(in, d);
    const std::string kind = in.get_string("state.kind", "delta");
    LatticeFunction phi(LatticeBox(d, 1));
    if (kind == "delta") {
        phi.at(std::vector<long>(static_cast<std::size_t>(d), 0)) = cplx(1.0, 0.0);
    } else if (kind == "packet") {
        const std::vector<double> center = in.require_double_list("state.center");
        if (static_cast<int>(center.size()) != d)
            throw config_error("config key 'state.center': needs exactly " + std::to_string(d) +
                               " components");
        const double sigma = in.get_double("state.sigma", 6.0);
        const double radius = in.get_double("state.radius", 0.1);
        phi = gaussian_packet(d, center, sigma, radius).psi0;
    } else if (kind == "bound") {
        const long half = static_cast<long>(in.get_int("state.bound_half", 12));
        const long long index = in.get_int("state.bound_index", 0);
        const BoxSpectrum spectrum = boxed_bound_states(v, LatticeBox(d, half), 1e-8, true);
        if (index < 0 || static_cast<std::size_t>(index) >= spectrum.energies.size())
            throw config_error("config key 'state.bound_index': the potential exposes " +
                               std::to_string(spectrum.energies.size()) +
                               " bound state(s) on the requested box");
        phi = spectrum.vectors[static_cast<std::size_t>(index)];
    } else {
        throw config_error("config key 'state.kind': expected delta | packet | bound, got '" +
                           kind + "'");
    }
    const std::vector<double> times = in.require_double_list("times");
    const double radius = in.get_double("radius", 4.0);
    const bool remove_bound = in.get_bool("remove_bound", true);
    const long bound_half = static_cast<long>(in.get_int("bound_half", 12));
    const WaveBudget budget = read_wave_budget(in);
    const double avg_mass_max = in.get_double("check.avg_mass_max", 1e9);
    const double avg_mass_min = in.get_double("check.avg_mass_min", -1.0);

    const CompletenessReport rep =
        completeness_diagnostic(v, phi, times, radius, remove_bound, budget, bound_half);

    ResultTable& history = add_table(env, "local_mass", {"time", "mass"});
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        history.rows.push_back({Value(rep.times[i]), Value(rep.local_mass_history[i])});
    ResultTable& bound = add_table(env, "bound_energies", {"index", "energy"});
    for (std::size_t i = 0; i < rep.bound_energies.size(); ++i)
        bound.rows.push_back({vi(i), Value(rep.bound_energies[i])});

    meta(env, "averaged_local_mass", rep.averaged_local_mass);
    meta(env, "removed_mass", rep.removed_mass);
    meta(env, "norm_drift", rep.norm_drift);
    meta(env, "box_half", vi(rep.box_half));

    bool ok = rep.averaged_local_mass <= avg_mass_max;
    if (avg_mass_min >= 0.0) ok = ok && rep.averaged_local_mass >= avg_mass_min;
    env.passed = ok;
}

void run_gamma(ParamReader& in, const RunContext& ctx, ResultEnvelope& env) {
    GammaProfile profile;
    profile.plateau = in.get_double("gamma.plateau", 0.1);
    profile.support = in.get_double("gamma.support", 0.2);
    profile.smooth_order = static_cast<int>(in.get_int("gamma.order", 2));
    const std::vector<double> eps_grid =
        in.get_double_list("eps_grid", {0.0, 1.25e-4, 2.5e-4, 5e-4, 1e-3});
    const std::vector<double> xd_grid = in.get_double_list("xd_grid", {4.0, 8.0, 16.0, 32.0});
    const HalfPlane side = read_side(in);
    const int half_plane = side == HalfPlane::upper ? +1 : -1;
    const double tol = in.get_double("tol", 1e-10);
    const std::vector<double> frequencies = in.get_double_list("pv.frequencies", {0.5, 1.0, 2.0});
    const double pv_tol = in.get_double("pv.tol", 1e-12);
    const double pv_error_max = in.get_double("check.pv_error_max", 1e-10);

    const GammaScanReport rep = gamma_bounds_scan(profile, eps_grid, xd_grid, half_plane, tol);

    std::vector<double> masses(frequencies.size(), 0.0);
    parallel_for(frequencies.size(), ctx.threads,
                 [&](std::size_t i) { masses[i] = pv_phase_mass(frequencies[i], 0.0, pv_tol); });

    ResultTable& values = add_table(env, "gamma_values",
                                    {"eps", "x_d", "value_re", "value_im", "abs_value"});
    for (std::size_t i = 0; i < rep.eps_grid.size(); ++i)
        for (std::size_t j = 0; j < rep.xd_grid.size(); ++j) {
            const cplx g = rep.values[i * rep.xd_grid.size() + j];
            values.rows.push_back({Value(rep.eps_grid[i]), Value(rep.xd_grid[j]),
                                   Value(g.real()), Value(g.imag()), Value(std::abs(g))});
        }
    ResultTable& holder = add_table(env, "holder", {"x_d", "slope", "prefactor"});
    for (std::size_t j = 0; j < rep.xd_grid.size(); ++j)
        holder.rows.push_back(
            {Value(rep.xd_grid[j]), Value(rep.holder_slopes[j]), Value(rep.holder_prefactors[j])});
    ResultTable& interp = add_table(env, "interpolation", {"delta", "ratio"});
    for (std::size_t i = 0; i < rep.interp_deltas.size(); ++i)
        interp.rows.push_back({Value(rep.interp_deltas[i]), Value(rep.interp_ratios[i])});
    ResultTable& pv = add_table(env, "pv", {"frequency", "mass", "abs_error"});
    bool pv_ok = true;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        const double err = std::fabs(masses[i] - pi);
        pv.rows.push_back({Value(frequencies[i]), Value(masses[i]), Value(err)});
        pv_ok = pv_ok && err <= pv_error_max;
    }

    meta(env, "sup_abs", rep.sup_abs);
    meta(env, "sup_refined", rep.sup_refined);
    meta(env, "sup_change", rep.sup_change);
    meta(env, "holder_slope", rep.holder_slope);
    meta(env, "prefactor_growth", rep.prefactor_growth);
    meta(env, "sup_stable", rep.sup_stable);
    meta(env, "holder_ok", rep.holder_ok);
    meta(env, "growth_ok", rep.growth_ok);
    meta(env, "interp_ok", rep.interp_ok);
    env.passed = rep.sup_stable && rep.holder_ok && rep.growth_ok && rep.interp_ok && pv_ok;
}

rational parse_rational(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw config_error("config key '" + key + "': empty rational");
    const std::size_t slash = t.find('/');
    try {
        if (slash != std::string::npos) {
            const long long num = parse_ll(key, t.substr(0, slash));
            const long long den = parse_ll(key, t.substr(slash + 1));
            if (den == 0) throw config_error("config key '" + key + "': zero denominator");
            return rational(num, den);
        }
        const std::size_t dot = t.find('.');
        if (dot == std::string::npos) return rational(parse_ll(key, t), 1);
        const std::string head = t.substr(0, dot);
        const std::string frac = t.substr(dot + 1);
        if (frac.empty() || frac.size() > 15)
            throw config_error("config key '" + key + "': unsupported decimal '" + t + "'");
        long long den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const bool negative = !head.empty() && head[0] == '-';
        const std::string ipart = (head.empty() || head == "-" || head == "+")
                                      ? std::string("0")
                                      : (negative || head[0] == '+' ? head.substr(1) : head);
        const long long whole = ipart.empty() ? 0 : parse_ll(key, ipart);
        const long long numer = whole * den + parse_ll(key, frac);
        return rational(negative ? -numer : numer, den);
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': cannot parse rational '" + t + "'");
    }
}

std::string rational_text(const rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

void run_region(ParamReader& in, const RunContext& ctx, ResultEnvelope& env) {
    const rational k = parse_rational("k", in.require_string("k"));
    const std::string pairs_text = in.require_string("pairs");
    std::vector<std::pair<rational, rational>> pairs;
    std::vector<std::pair<std::string, std::string>> labels;
    for (const std::string& tuple : split(pairs_text, ';')) {
        const std::vector<std::string> parts = split(tuple, ',');
        if (parts.size() != 2)
            throw config_error("config key 'pairs': each entry needs '1/p, 1/q', got '" + tuple +
                               "'");
        pairs.emplace_back(parse_rational("pairs", parts[0]), parse_rational("pairs", parts[1]));
        labels.emplace_back(parts[0], parts[1]);
    }
    std::vector<bool> expected;
    const std::string expect_text = in.get_string("check.expect", "");
    if (!expect_text.empty()) {
        for (const std::string& part : split(expect_text, ','))
            expected.push_back(parse_bool("check.expect", part));
        if (expected.size() != pairs.size())
            throw config_error("config key 'check.expect': needs one boolean per pair");
    }

    // membership is decided in exact rational arithmetic, so boundary probes
    // land on the correct side instead of depending on rounding
    std::vector<char> admissible(pairs.size(), 0);
    parallel_for(pairs.size(), ctx.threads, [&](std::size_t i) {
        admissible[i] = in_admissible_region(pairs[i].first, pairs[i].second, k) ? 1 : 0;
    });

    ResultTable& table = add_table(env, "region", {"inv_p", "inv_q", "admissible"});
    for (std::size_t i = 0; i < pairs.size(); ++i)
        table.rows.push_back(
            {Value(labels[i].first), Value(labels[i].second), Value(admissible[i] != 0)});

    const rational pmax = duality_line_pmax(k);
    meta(env, "duality_pmax", boost::rational_cast<double>(pmax));
    meta(env, "duality_pmax_exact", rational_text(pmax));

    bool ok = true;
    for (std::size_t i = 0; i < expected.size(); ++i)
        ok = ok && (admissible[i] != 0) == expected[i];
    env.passed = ok;
}

// ---------------------------------------------------------------------------
// dispatch

using Runner = void (*)(ParamReader&, const RunContext&, ResultEnvelope&);

const std::vector<std::pair<std::string, Runner>>& runners() {
    static const std::vector<std::pair<std::string, Runner>> table = {
        {"green", run_green},
        {"lap", run_lap},
        {"decay", run_decay},
        {"dispersive", run_dispersive},
        {"opnorm", run_opnorm},
        {"assumptions", run_assumptions},
        {"bs-scan", run_bs_scan},
        {"bound-states", run_bound_states},
        {"holder", run_holder},
        {"wave", run_wave},
        {"complete", run_complete},
        {"gamma", run_gamma},
        {"region", run_region},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : runners()) out.push_back(name);
        return out;
    }();
    return names;
}

ResultEnvelope run_scenario(const std::string& scenario, const ScenarioConfig& config,
                            const RunOptions& options) {
    Runner runner = nullptr;
    for (const auto& [name, fn] : runners())
        if (name == scenario) runner = fn;
    if (!runner) {
        std::string names;
        for (const std::string& name : scenario_names()) {
            if (!names.empty()) names += " | ";
            names += name;
        }
        throw config_error("unknown scenario '" + scenario + "', expected one of " + names);
    }

    ResultEnvelope env;
    env.scenario = scenario;
    ParamReader reader(config, env);

    RunContext ctx;
    long long seed = reader.get_int("seed", 1);
    if (options.seed) {
        seed = static_cast<long long>(*options.seed);
        reader.override_note("seed", seed);
    }
    ctx.seed = static_cast<std::uint64_t>(seed);
    long long threads = reader.get_int("threads", 1);
    if (options.threads) {
        threads = *options.threads;
        reader.override_note("threads", threads);
    }
    if (threads < 1) throw config_error("config key 'threads': must be a positive integer");
    ctx.threads = static_cast<int>(std::min<long long>(threads, 256));

    const auto start = std::chrono::steady_clock::now();
    runner(reader, ctx, env);
    config.reject_unconsumed(scenario);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::pair<std::string, Value>> metadata;
    metadata.emplace_back("tool_version", std::string(tool_version));
    for (auto& entry : env.metadata) metadata.push_back(std::move(entry));
    metadata.emplace_back("wall_time_seconds", elapsed);
    metadata.emplace_back("passed", env.passed);
    env.metadata = std::move(metadata);
    return env;
}

// ---------------------------------------------------------------------------
// emitters

namespace {

nlohmann::ordered_json value_json(const Value& v) {
    return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

std::string csv_field(const Value& v) {
    std::string text = std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, double>) return fmt_g17(x);
            else return x;
        },
        v);
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        quoted.push_back(c);
        if (c == '"') quoted.push_back('"');
    }
    quoted.push_back('"');
    return quoted;
}

ResultTable key_value_table(const std::string& name,
                            const std::vector<std::pair<std::string, Value>>& entries) {
    ResultTable table{name, {"key", "value"}, {}};
    for (const auto& [key, value] : entries) table.rows.push_back({Value(key), value});
    return table;
}

}  // namespace

std::string emit_json(const ResultEnvelope& env) {
    nlohmann::ordered_json j;
    j["scenario"] = env.scenario;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : env.params) params[key] = value_json(value);
    j["params"] = std::move(params);
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    for (const ResultTable& table : env.results) {
        nlohmann::ordered_json block = nlohmann::ordered_json::object();
        block["columns"] = table.columns;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const std::vector<Value>& row : table.rows) {
            nlohmann::ordered_json cells = nlohmann::ordered_json::array();
            for (const Value& cell : row) cells.push_back(value_json(cell));
            rows.push_back(std::move(cells));
        }
        block["rows"] = std::move(rows);
        results[table.name] = std::move(block);
    }
    j["results"] = std::move(results);
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    for (const auto& [key, value] : env.metadata) metadata[key] = value_json(value);
    j["metadata"] = std::move(metadata);
    return j.dump(2) + "\n";
}

std::string emit_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ",";
        out += csv_field(Value(table.columns[c]));
    }
    out += "\n";
    for (const std::vector<Value>& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            out += csv_field(row[c]);
        }
        out += "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> emit_csv_blocks(const ResultEnvelope& env) {
    std::vector<std::pair<std::string, std::string>> blocks;
    blocks.emplace_back("params", emit_csv(key_value_table("params", env.params)));
    for (const ResultTable& table : env.results) blocks.emplace_back(table.name, emit_csv(table));
    blocks.emplace_back("metadata", emit_csv(key_value_table("metadata", env.metadata)));
    return blocks;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("failed while writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// command line

int run_main(int argc, const char* const* argv) {
    CLI::App app{"numerical laboratory for lattice resolvent, dispersive and scattering checks"};
    std::string scenario;
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::uint64_t seed = 1;
    int threads = 1;

    app.add_option("scenario", scenario, "scenario to run")
        ->required()
        ->check(CLI::IsMember(scenario_names()));
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--out", out_path, "report path (stdout when omitted)");
    app.add_option("--format", format, "report format")
        ->check(CLI::IsMember(std::vector<std::string>{"json", "csv"}));
    CLI::Option* seed_opt = app.add_option("--seed", seed, "master seed overriding the config");
    CLI::Option* threads_opt =
        app.add_option("--threads", threads, "worker threads (default LAPBOX_THREADS, then 1)");
    app.set_version_flag("--version", tool_version);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ResultEnvelope env;
    try {
        RunOptions options;
        if (seed_opt->count() > 0) options.seed = seed;
        if (threads_opt->count() > 0) {
            options.threads = threads;
        } else if (const char* env_threads = std::getenv("LAPBOX_THREADS")) {
            options.threads = static_cast<int>(parse_ll("LAPBOX_THREADS", env_threads));
        }
        const ScenarioConfig config =
            config_path.empty() ? ScenarioConfig() : ScenarioConfig::from_file(config_path);
        env = run_scenario(scenario, config, options);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    try {
        if (format == "json") {
            const std::string report = emit_json(env);
            if (out_path.empty())
                std::cout << report;
            else
                write_file_atomic(out_path, report);
        } else {
            const std::vector<std::pair<std::string, std::string>> blocks = emit_csv_blocks(env);
            if (out_path.empty()) {
                for (const auto& [name, csv] : blocks)
                    std::cout << "# block: " << name << "\n" << csv << "\n";
            } else {
                namespace fs = std::filesystem;
                const fs::path base(out_path);
                std::string ext = base.extension().string();
                if (ext.empty()) ext = ".csv";
                const fs::path stem = base.parent_path() / base.stem();
                for (const auto& [name, csv] : blocks)
                    write_file_atomic(stem.string() + "." + name + ext, csv);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    std::cerr << "lapbox " << env.scenario << ": "
              << (env.passed ? "pass" : "numeric checks FAILED") << "\n";
    return env.passed ? 0 : 1;
}

}  // namespace lapbox
