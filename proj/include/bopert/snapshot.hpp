#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bopert/birkhoff.hpp"
#include "bopert/errors.hpp"
#include "bopert/evolve.hpp"
#include "bopert/fourier.hpp"
#include "bopert/gauge.hpp"
#include "bopert/multiplier.hpp"

namespace bopert {

using nlohmann::json;

// --- field <-> JSON -----------------------------------------------------------

inline json field_to_json(const TorusField& f) {
    json coeffs = json::array();
    for (const auto& c : f.coeffs()) coeffs.push_back(json::array({c.real(), c.imag()}));
    return json{{"N", f.modes()}, {"coeffs", std::move(coeffs)}};
}

inline TorusField field_from_json(const json& j) {
    try {
        const int modes = j.at("N").get<int>();
        const auto& arr = j.at("coeffs");
        std::vector<Complex> coeffs;
        coeffs.reserve(arr.size());
        for (const auto& pair : arr)
            coeffs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        return TorusField(modes, std::move(coeffs));
    } catch (const json::exception& e) {
        throw FormatError(std::string("field_from_json: ") + e.what());
    }
}

inline json birkhoff_to_json(const BirkhoffState& z) {
    json zeta = json::array();
    for (const auto& c : z.values()) zeta.push_back(json::array({c.real(), c.imag()}));
    return json{{"zeta", std::move(zeta)}};
}

inline BirkhoffState birkhoff_from_json(const json& j) {
    try {
        std::vector<Complex> zeta;
        for (const auto& pair : j.at("zeta"))
            zeta.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        return BirkhoffState(std::move(zeta));
    } catch (const json::exception& e) {
        throw FormatError(std::string("birkhoff_from_json: ") + e.what());
    }
}

inline json gauge_to_json(const GaugeParams& gp) { return json{{"a0", gp.a0}, {"c0", gp.c0}}; }

inline GaugeParams gauge_from_json(const json& j) {
    try {
        return GaugeParams{j.at("a0").get<double>(), j.at("c0").get<double>()};
    } catch (const json::exception& e) {
        throw FormatError(std::string("gauge_from_json: ") + e.what());
    }
}

// --- symbols -------------------------------------------------------------------

/// Table format of the custom-symbol interface: {"entries": [[n, re, im], ...]}.
inline MultiplierSymbol symbol_from_table_json(const json& j) {
    try {
        MultiplierSymbol::TableEntries entries;
        for (const auto& row : j.at("entries"))
            entries[row.at(0).get<std::int64_t>()] =
                Complex(row.at(1).get<double>(), row.at(2).get<double>());
        return table_symbol(std::move(entries));
    } catch (const json::exception& e) {
        throw FormatError(std::string("symbol_from_table_json: ") + e.what());
    }
}

inline MultiplierSymbol symbol_from_table_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("symbol_from_table_file: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("symbol_from_table_file: ") + e.what());
    }
    return symbol_from_table_json(j);
}

inline json symbol_to_json(const MultiplierSymbol& sym) {
    json j{{"name", sym.name()}};
    if (!sym.params().empty()) {
        json params = json::object();
        for (const auto& [key, value] : sym.params()) params[key] = value;
        j["params"] = std::move(params);
    }
    if (sym.table()) {
        std::vector<std::pair<std::int64_t, Complex>> rows(sym.table()->begin(), sym.table()->end());
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        json entries = json::array();
        for (const auto& [n, c] : rows) entries.push_back(json::array({n, c.real(), c.imag()}));
        j["entries"] = std::move(entries);
    }
    return j;
}

inline MultiplierSymbol symbol_from_json(const json& j) {
    try {
        const std::string name = j.at("name").get<std::string>();
        auto param = [&](const char* key, double fallback) -> double {
            if (j.contains("params") && j["params"].contains(key))
                return j["params"][key].get<double>();
            return fallback;
        };
        if (name == "zero" || name == "bo") return zero_symbol();
        if (name == "rayleigh") return rayleigh_symbol(param("gamma", -1.0));
        if (name == "smith") return smith_symbol();
        if (name == "ilw-full") return ilw_full_symbol(param("delta", 1.0));
        if (name == "ilw-boosted") return ilw_boosted_symbol(param("delta", 1.0));
        if (name == "table") return symbol_from_table_json(j);
        throw FormatError("symbol_from_json: unknown symbol name '" + name + "'");
    } catch (const json::exception& e) {
        throw FormatError(std::string("symbol_from_json: ") + e.what());
    }
}

// --- trajectories ----------------------------------------------------------------

inline json solver_config_to_json(const SolverConfig& cfg) {
    return json{{"N", cfg.modes},
                {"dt", cfg.dt},
                {"T", cfg.horizon},
                {"symbol", symbol_to_json(cfg.symbol)},
                {"dealias_fraction", cfg.dealias_fraction},
                {"sample_every", cfg.sample_every},
                {"nonlinearity_enabled", cfg.nonlinearity_enabled},
                {"seed", cfg.seed}};
}

inline SolverConfig solver_config_from_json(const json& j) {
    try {
        SolverConfig cfg;
        cfg.modes = j.at("N").get<int>();
        cfg.dt = j.at("dt").get<double>();
        cfg.horizon = j.at("T").get<double>();
        cfg.symbol = symbol_from_json(j.at("symbol"));
        cfg.dealias_fraction = j.at("dealias_fraction").get<double>();
        cfg.sample_every = j.at("sample_every").get<int>();
        cfg.nonlinearity_enabled = j.at("nonlinearity_enabled").get<bool>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        return cfg;
    } catch (const json::exception& e) {
        throw FormatError(std::string("solver_config_from_json: ") + e.what());
    }
}

inline json trajectory_to_json(const Trajectory& traj) {
    json states = json::array();
    for (const auto& state : traj.states) states.push_back(field_to_json(state));
    return json{{"config", solver_config_to_json(traj.config)},
                {"times", traj.times},
                {"states", std::move(states)}};
}

inline Trajectory trajectory_from_json(const json& j) {
    try {
        Trajectory traj;
        traj.config = solver_config_from_json(j.at("config"));
        traj.times = j.at("times").get<std::vector<double>>();
        for (const auto& state : j.at("states")) traj.states.push_back(field_from_json(state));
        if (traj.times.size() != traj.states.size())
            throw FormatError("trajectory_from_json: times and states disagree in length");
        for (std::size_t i = 1; i < traj.times.size(); ++i)
            if (!(traj.times[i] > traj.times[i - 1]))
                throw FormatError("trajectory_from_json: times must be strictly increasing");
        for (const auto& state : traj.states)
            if (state.modes() != traj.states.front().modes())
                throw FormatError("trajectory_from_json: states must share one band");
        return traj;
    } catch (const json::exception& e) {
        throw FormatError(std::string("trajectory_from_json: ") + e.what());
    }
}

inline void save_snapshot(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_snapshot: cannot open " + path.string());
    out << trajectory_to_json(traj).dump(2) << '\n';
}

inline Trajectory load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_snapshot: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("load_snapshot: ") + e.what());
    }
    return trajectory_from_json(j);
}

// --- binary coefficient dump --------------------------------------------------
//
// Layout: 8-byte magic "BOPERT01", N as a 64-bit little-endian integer, then
// for each stored state N+1 coefficient pairs as little-endian doubles
// (re, im interleaved).

namespace detail {

inline constexpr char dump_magic[8] = {'B', 'O', 'P', 'E', 'R', 'T', '0', '1'};

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

inline double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

} // namespace detail

inline std::string coeff_dump_bytes(const Trajectory& traj) {
    std::string out(detail::dump_magic, sizeof detail::dump_magic);
    const std::uint64_t modes = traj.states.empty() ? 0 : static_cast<std::uint64_t>(traj.states.front().modes());
    detail::put_u64(out, modes);
    for (const auto& state : traj.states) {
        if (static_cast<std::uint64_t>(state.modes()) != modes)
            throw FormatError("coeff_dump_bytes: states must share one band");
        for (const auto& c : state.coeffs()) {
            detail::put_f64(out, c.real());
            detail::put_f64(out, c.imag());
        }
    }
    return out;
}

inline void save_coeff_dump(const Trajectory& traj, const std::filesystem::path& path) {
    const std::string bytes = coeff_dump_bytes(traj);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("save_coeff_dump: cannot open " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<TorusField> coeff_dump_from_bytes(const std::string& bytes) {
    if (bytes.size() < 16 ||
        !std::equal(detail::dump_magic, detail::dump_magic + sizeof detail::dump_magic, bytes.begin()))
        throw FormatError("coeff dump: bad header");
    const auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t modes = detail::get_u64(base + 8);
    if (modes == 0) {
        if (bytes.size() != 16) throw FormatError("coeff dump: empty dump must be header-only");
        return {};
    }
    if (modes > (1u << 24)) throw FormatError("coeff dump: implausible band");
    const std::size_t state_bytes = (static_cast<std::size_t>(modes) + 1) * 16;
    const std::size_t payload = bytes.size() - 16;
    if (payload % state_bytes != 0) throw FormatError("coeff dump: truncated payload");
    std::vector<TorusField> states;
    const std::size_t count = payload / state_bytes;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<Complex> coeffs(static_cast<std::size_t>(modes) + 1);
        const unsigned char* p = base + 16 + k * state_bytes;
        for (std::size_t n = 0; n < coeffs.size(); ++n)
            coeffs[n] = Complex(detail::get_f64(p + 16 * n), detail::get_f64(p + 16 * n + 8));
        states.emplace_back(static_cast<int>(modes), std::move(coeffs));
    }
    return states;
}

inline std::vector<TorusField> load_coeff_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_coeff_dump: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return coeff_dump_from_bytes(buffer.str());
}

} // namespace bopert
