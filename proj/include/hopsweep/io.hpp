#pragma once

// File formats: QUBO JSON, MPS checkpoints, run configuration and reports,
// and the CSV traces.
//
// QUBO JSON (version 1):
//   {"format": "hopsweep-qubo", "version": 1, "n": 3, "offset": 0.0,
//    "entries": [[1, 1, -1.0], [1, 2, 0.5]]}
// Indices are 1-based. Each value is the symmetric matrix element Q_ij, so an
// off-diagonal entry contributes 2 * value * x_i * x_j. Entries with i > j are
// folded onto (j, i) and repeated entries accumulate. "format", "version" and
// "offset" are optional on input.
//
// MPS checkpoint (version 1):
//   {"format": "hopsweep-mps", "version": 1, "center": 0 | null,
//    "sites": [{"dims": [l, 2, r], "data": [...]}, ...]}
// Site data is row-major over (l, p, r); p = 0 is spin up.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopsweep/drive.hpp"
#include "hopsweep/mps.hpp"
#include "hopsweep/qubo.hpp"

namespace hopsweep::io {

using json = nlohmann::json;

class FormatError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kQuboVersion = 1;
inline constexpr int kMpsVersion = 1;
inline constexpr int kReportVersion = 1;

inline std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(what + ": " + e.what());
    }
}

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
    if (!j.is_object()) throw FormatError(what + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw FormatError(what + ": unknown key '" + key + "'");
}

inline void check_header(const json& j, const std::string& format, int version, const std::string& what) {
    if (j.contains("format") && j.at("format") != format)
        throw FormatError(what + ": format must be \"" + format + "\"");
    if (j.contains("version") && j.at("version") != version)
        throw FormatError(what + ": unsupported version " + j.at("version").dump());
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(what + ": field '" + key + "': " + e.what());
    }
}

inline std::size_t get_count(const json& j, const std::string& key, const std::string& what) {
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw FormatError(what + ": field '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

}  // namespace detail

// ---- QUBO ----

inline json qubo_to_json(const QuboModel& q) {
    json entries = json::array();
    for (const auto& [ij, v] : q.entries())
        if (v != 0.0) entries.push_back({ij.first + 1, ij.second + 1, v});
    return {{"format", "hopsweep-qubo"},
            {"version", kQuboVersion},
            {"n", q.size()},
            {"offset", q.offset()},
            {"entries", entries}};
}

inline QuboModel qubo_from_json(const json& j) {
    const std::string what = "QUBO JSON";
    detail::reject_unknown(j, {"format", "version", "n", "offset", "entries"}, what);
    detail::check_header(j, "hopsweep-qubo", kQuboVersion, what);
    if (!j.contains("n") || !j.contains("entries")) throw FormatError(what + ": 'n' and 'entries' are required");
    const std::size_t n = detail::get_count(j, "n", what);
    const double offset = j.contains("offset") ? detail::get_as<double>(j, "offset", what) : 0.0;
    QuboModel q(n, offset);
    const json& entries = j.at("entries");
    if (!entries.is_array()) throw FormatError(what + ": 'entries' must be an array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const json& e = entries[k];
        const std::string where = what + ": entry " + std::to_string(k);
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            !e[2].is_number())
            throw FormatError(where + " must be [i, j, value] with integer indices");
        const long long i = e[0].get<long long>(), jj = e[1].get<long long>();
        if (i < 1 || jj < 1 || static_cast<std::size_t>(i) > n || static_cast<std::size_t>(jj) > n)
            throw FormatError(where + ": index out of range 1.." + std::to_string(n));
        q.add(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(jj - 1), e[2].get<double>());
    }
    return q;
}

inline QuboModel read_qubo(const std::string& path) { return qubo_from_json(parse_json(read_text(path), path)); }

// ---- MPS checkpoint ----

inline json mps_to_json(const MatrixProductState& s) {
    json sites = json::array();
    for (const DenseTensor& t : s.sites()) {
        const auto d = t.data();
        sites.push_back({{"dims", t.dims()}, {"data", std::vector<double>(d.begin(), d.end())}});
    }
    json j = {{"format", "hopsweep-mps"}, {"version", kMpsVersion}, {"sites", sites}};
    j["center"] = s.center() ? json(*s.center()) : json(nullptr);
    return j;
}

inline MatrixProductState mps_from_json(const json& j) {
    const std::string what = "MPS checkpoint";
    detail::reject_unknown(j, {"format", "version", "center", "sites"}, what);
    if (!j.contains("format") || !j.contains("version"))
        throw FormatError(what + ": 'format' and 'version' are required");
    detail::check_header(j, "hopsweep-mps", kMpsVersion, what);
    if (!j.contains("sites") || !j.at("sites").is_array()) throw FormatError(what + ": 'sites' must be an array");
    std::vector<DenseTensor> sites;
    for (const json& sj : j.at("sites")) {
        detail::reject_unknown(sj, {"dims", "data"}, what + " site");
        auto dims = detail::get_as<std::vector<std::size_t>>(sj, "dims", what);
        auto data = detail::get_as<std::vector<double>>(sj, "data", what);
        if (dims.size() != 3) throw FormatError(what + ": site dims must have three entries");
        try {
            sites.emplace_back(std::vector<Label>{kLeft, kPhys, kRight}, std::move(dims), std::move(data));
        } catch (const std::exception& e) {
            throw FormatError(what + ": " + e.what());
        }
    }
    try {
        if (j.contains("center") && !j.at("center").is_null())
            return MatrixProductState(std::move(sites), detail::get_count(j, "center", what));
        return MatrixProductState(std::move(sites));
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(what + ": " + e.what());
    }
}

// ---- run parameters ----
//
// Keys mirror DriveParams; the same object appears as "params" in every run
// report so a report can be fed back as a configuration.

inline std::string init_to_string(const InitSpec& s) {
    return s.kind == InitKind::minus_product ? "minus" : "random:" + std::to_string(s.bond);
}

inline InitSpec init_from_string(const std::string& s) {
    if (s == "minus") return {InitKind::minus_product, 3};
    if (s == "random") return {InitKind::random, 3};
    if (s.rfind("random:", 0) == 0) {
        const std::string d = s.substr(7);
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(d, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == d.size() && !d.empty() && v >= 1) return {InitKind::random, v};
    }
    throw FormatError("init must be 'minus' or 'random:D' with D >= 1 (got '" + s + "')");
}

inline const std::set<std::string>& param_keys() {
    static const std::set<std::string> keys = {
        "steps",        "hx",     "eta",         "bond_dim",      "cutoff",   "sweeps",     "krylov_dim",
        "eig_tol",      "eig_restarts", "early_exit", "init",     "seed",     "restarts",   "target_energy",
        "n_up_ground",  "rescale", "noise",      "restart_bond",  "jobs",     "target_tol", "record_site_rows"};
    return keys;
}

inline json params_to_json(const DriveParams& p) {
    json j = {{"steps", p.m_steps},
              {"hx", p.hx},
              {"eta", p.eta},
              {"bond_dim", p.sweep.max_bond},
              {"cutoff", p.sweep.cutoff},
              {"sweeps", p.sweep.nsweeps},
              {"krylov_dim", p.sweep.krylov_dim},
              {"eig_tol", p.sweep.eig_tol},
              {"eig_restarts", p.sweep.eig_restarts},
              {"early_exit", p.sweep.early_exit},
              {"init", init_to_string(p.init)},
              {"seed", p.seed},
              {"restarts", p.max_restarts},
              {"rescale", p.rescale},
              {"noise", p.noise == NoisePolicy::per_step ? "per_step" : "per_run"},
              {"restart_bond", p.restart_bond},
              {"jobs", p.jobs},
              {"target_tol", p.target_tol},
              {"record_site_rows", p.record_site_rows}};
    j["target_energy"] = p.target_energy ? json(*p.target_energy) : json(nullptr);
    j["n_up_ground"] = p.n_up_ground ? json(*p.n_up_ground) : json(nullptr);
    return j;
}

/// Overwrite the fields of `p` present in `j`. Keys outside param_keys() and
/// `extra_keys` are rejected.
inline void apply_params(const json& j, DriveParams& p, const std::set<std::string>& extra_keys = {}) {
    const std::string what = "configuration";
    if (!j.is_object()) throw FormatError(what + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!param_keys().count(key) && !extra_keys.count(key)) throw FormatError(what + ": unknown key '" + key + "'");
    auto count = [&](const char* k, std::size_t& dst) {
        if (j.contains(k)) dst = detail::get_count(j, k, what);
    };
    auto real = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = detail::get_as<double>(j, k, what);
    };
    auto flag = [&](const char* k, bool& dst) {
        if (j.contains(k)) dst = detail::get_as<bool>(j, k, what);
    };
    count("steps", p.m_steps);
    real("hx", p.hx);
    real("eta", p.eta);
    count("bond_dim", p.sweep.max_bond);
    real("cutoff", p.sweep.cutoff);
    count("sweeps", p.sweep.nsweeps);
    count("krylov_dim", p.sweep.krylov_dim);
    real("eig_tol", p.sweep.eig_tol);
    count("eig_restarts", p.sweep.eig_restarts);
    flag("early_exit", p.sweep.early_exit);
    if (j.contains("init")) p.init = init_from_string(detail::get_as<std::string>(j, "init", what));
    if (j.contains("seed")) p.seed = detail::get_as<std::uint64_t>(j, "seed", what);
    count("restarts", p.max_restarts);
    flag("rescale", p.rescale);
    if (j.contains("noise")) {
        const auto s = detail::get_as<std::string>(j, "noise", what);
        if (s == "per_step")
            p.noise = NoisePolicy::per_step;
        else if (s == "per_run")
            p.noise = NoisePolicy::per_run;
        else
            throw FormatError(what + ": noise must be \"per_step\" or \"per_run\"");
    }
    count("restart_bond", p.restart_bond);
    count("jobs", p.jobs);
    real("target_tol", p.target_tol);
    flag("record_site_rows", p.record_site_rows);
    if (j.contains("target_energy"))
        p.target_energy = j.at("target_energy").is_null()
                              ? std::nullopt
                              : std::optional<double>(detail::get_as<double>(j, "target_energy", what));
    if (j.contains("n_up_ground"))
        p.n_up_ground = j.at("n_up_ground").is_null()
                            ? std::nullopt
                            : std::optional<std::size_t>(detail::get_count(j, "n_up_ground", what));
}

// ---- run report ----

inline std::string spins_to_string(const SpinConfiguration& c) {
    std::string s;
    s.reserve(c.size());
    for (Spin v : c.values) s.push_back(v == Spin::up ? '1' : '0');
    return s;
}

inline json step_to_json(const StepRecord& r) {
    return {{"step", r.step},
            {"a", r.a},
            {"b", r.b},
            {"energy", r.energy},
            {"sx_total", r.sx_total},
            {"sz_total", r.sz_total},
            {"max_bond_reached", r.max_bond_reached},
            {"bond_after", r.bond_after},
            {"sweeps_run", r.sweeps_run},
            {"wall_seconds", r.wall_seconds}};
}

/// `extra` is merged at the top level (instance path, frontend results).
inline json report_to_json(const RunReport& r, const json& extra = json::object()) {
    json steps = json::array();
    for (const StepRecord& s : r.steps) steps.push_back(step_to_json(s));
    json j = {{"format", "hopsweep-report"},
              {"version", kReportVersion},
              {"seed", r.seed},
              {"params", params_to_json(r.params)},
              {"configuration", spins_to_string(r.configuration)},
              {"classical_energy", r.classical_energy},
              {"mps_energy", r.mps_energy},
              {"final_bond", r.final_bond},
              {"best_attempt", r.best_attempt},
              {"restarts", r.restarts},
              {"converged", r.converged},
              {"rescale_factor", r.rescale_factor},
              {"readout", r.readout_used == ReadoutRule::threshold ? "threshold" : "projective"},
              {"attempt_energies", r.attempt_energies},
              {"steps", steps},
              {"wall_seconds", r.wall_seconds}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

// ---- CSV ----

namespace detail {
inline std::string num(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}
}  // namespace detail

/// step,a,b,energy,sx_total,sz_total
inline std::string trace_csv(const std::vector<StepRecord>& steps) {
    std::string out = "step,a,b,energy,sx_total,sz_total\n";
    for (const StepRecord& s : steps)
        out += std::to_string(s.step) + ',' + detail::num(s.a) + ',' + detail::num(s.b) + ',' +
               detail::num(s.energy) + ',' + detail::num(s.sx_total) + ',' + detail::num(s.sz_total) + '\n';
    return out;
}

/// step,site,sz_value with 1-based sites.
inline std::string heatmap_csv(const std::vector<StepRecord>& steps) {
    std::string out = "step,site,sz_value\n";
    for (const StepRecord& s : steps)
        for (std::size_t m = 0; m < s.sz_sites.size(); ++m)
            out += std::to_string(s.step) + ',' + std::to_string(m + 1) + ',' + detail::num(s.sz_sites[m]) + '\n';
    return out;
}

/// site,hz with 1-based sites.
inline std::string fields_csv(const IsingModel& m) {
    std::string out = "site,hz\n";
    for (std::size_t k = 0; k < m.n; ++k) out += std::to_string(k + 1) + ',' + detail::num(m.hz[k]) + '\n';
    return out;
}

/// d,count,rho
inline std::string filling_csv(const GlassProfile& g) {
    std::string out = "d,count,rho\n";
    for (std::size_t d = 1; d <= g.rho.size(); ++d)
        out += std::to_string(d) + ',' + std::to_string(g.count[d - 1]) + ',' + detail::num(g.rho[d - 1]) + '\n';
    return out;
}

}  // namespace hopsweep::io
