#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "bopert/scenario.hpp"

using namespace bopert;

namespace {

std::filesystem::path fresh_dir(const char* tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("bopert_scen_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

Scenario mini_scenario(ScenarioKind kind, const std::string& extra = "") {
    Config cfg = Config::from_string(extra);
    // N = 32 keeps the dealiased cascade resolved for amplitude-one data, so
    // conservation defects reflect the scheme rather than band truncation
    cfg.set("solver.N", "32");
    cfg.set("solver.dt", "0.001");
    cfg.set("solver.T", "0.1");
    cfg.set("solver.sample_every", "20");
    cfg.set("beta.kappa", "8");
    cfg.set("beta.M", "64");
    return scenario_from_config(cfg, kind);
}

const Table& table_named(const RunRecord& record, const std::string& name) {
    for (const auto& t : record.tables)
        if (t.name == name) return t;
    FAIL("missing table " + name);
    throw std::runtime_error("unreachable");
}

} // namespace

TEST_CASE("scenario configuration") {
    SECTION("defaults resolve and validate") {
        const Scenario sc = scenario_from_config(Config{}, ScenarioKind::BoConservation);
        REQUIRE(sc.solver.modes == 128);
        REQUIRE(sc.lax_dim == 256);  // 2N default
        REQUIRE(sc.kappa == 8.0);
        REQUIRE(sc.solver.symbol.name() == "zero");
    }
    SECTION("unknown keys are rejected") {
        Config cfg;
        cfg.set("solver.modes", "64");  // wrong spelling
        REQUIRE_THROWS_AS(scenario_from_config(cfg, ScenarioKind::BoConservation), ConfigError);
    }
    SECTION("invalid settings are rejected before computation") {
        Config bad_kappa;
        bad_kappa.set("beta.kappa", "0.5");
        REQUIRE_THROWS_AS(scenario_from_config(bad_kappa, ScenarioKind::BoConservation), ConfigError);
        Config bad_s;
        bad_s.set("beta.s", "0.25");
        REQUIRE_THROWS_AS(scenario_from_config(bad_s, ScenarioKind::BoConservation), Error);
        Config bad_file;
        bad_file.set("data.kind", "file");
        bad_file.set("data.file", "/nonexistent/u0.json");
        REQUIRE_THROWS_AS(scenario_from_config(bad_file, ScenarioKind::Evolve), ConfigError);
    }
    SECTION("kind strings round trip") {
        for (ScenarioKind kind :
             {ScenarioKind::Evolve, ScenarioKind::BoConservation, ScenarioKind::ExpBound,
              ScenarioKind::IlwLimit, ScenarioKind::GaugeCheck, ScenarioKind::SymbolAudit,
              ScenarioKind::Isospectral, ScenarioKind::Tightness})
            REQUIRE(scenario_kind_from_string(to_string(kind)) == kind);
        REQUIRE_THROWS_AS(scenario_kind_from_string("nope"), ConfigError);
    }
}

TEST_CASE("initial data generators") {
    SECTION("two-mode datum") {
        DataSpec spec;
        spec.mean = 0.5;
        const TorusField u = make_initial_data(spec, 8, 0);
        REQUIRE(u.mean() == 0.5);
        REQUIRE(u.coeff(1) == Complex(1.0, 0.0));
        REQUIRE(u.coeff(2) == Complex(0.0, -0.25));
    }
    SECTION("rough data is seeded and deterministic") {
        DataSpec spec;
        spec.kind = "rough";
        const TorusField a = make_initial_data(spec, 32, 42);
        const TorusField b = make_initial_data(spec, 32, 42);
        const TorusField c = make_initial_data(spec, 32, 43);
        bool identical = true, different = false;
        for (int n = 0; n <= 32; ++n) {
            identical = identical && a.coeff(n) == b.coeff(n);
            different = different || a.coeff(n) != c.coeff(n);
        }
        REQUIRE(identical);
        REQUIRE(different);
        // magnitude profile follows the prescribed decay
        REQUIRE_THAT(std::abs(a.coeff(4)),
                     Catch::Matchers::WithinRel(std::pow(4.0, -0.26), 1e-12));
    }
}

TEST_CASE("bo-conservation scenario") {
    SECTION("zero datum passes trivially") {
        Scenario sc = mini_scenario(ScenarioKind::BoConservation, "data.amplitude=0\n");
        const RunRecord record = run_scenario(sc);
        REQUIRE(record.all_pass());
        const auto drift = csv::parse(table_named(record, "drift").text);
        REQUIRE(drift.header == std::vector<std::string>{"t", "beta", "rel_drift"});
        for (std::size_t r = 0; r < drift.rows.size(); ++r) {
            REQUIRE(drift.value(r, 1) == 0.0);
            REQUIRE(drift.value(r, 2) == 0.0);
        }
    }
    SECTION("smooth datum conserves beta at short horizon") {
        const RunRecord record = run_scenario(mini_scenario(ScenarioKind::BoConservation));
        REQUIRE(record.all_pass());
        const auto profile = csv::parse(table_named(record, "beta_profile").text);
        REQUIRE(profile.header == std::vector<std::string>{"t", "kappa", "beta", "beta_s"});
        REQUIRE(profile.rows.size() >= 2);
    }
}

TEST_CASE("verdict honesty") {
    const RunRecord record = run_scenario(mini_scenario(ScenarioKind::BoConservation));
    REQUIRE_FALSE(record.verdicts.empty());
    for (const auto& v : record.verdicts) {
        REQUIRE_FALSE(v.name.empty());
        REQUIRE(std::isfinite(v.measured));
        REQUIRE(std::isfinite(v.tolerance));
    }
}

TEST_CASE("determinism of emitted tables") {
    const Scenario sc = mini_scenario(ScenarioKind::BoConservation);
    const RunRecord a = run_scenario(sc);
    const RunRecord b = run_scenario(sc);
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
        REQUIRE(a.tables[i].name == b.tables[i].name);
        REQUIRE(a.tables[i].text == b.tables[i].text);
    }
}

TEST_CASE("ladder results are independent of the thread cap") {
    Config cfg;
    cfg.set("solver.N", "32");
    cfg.set("solver.T", "0.1");
    cfg.set("solver.sample_every", "20");
    cfg.set("ladder.deltas", "2,4");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::IlwLimit);
    ::setenv("BOPERT_THREADS", "1", 1);
    const RunRecord serial = run_scenario(sc);
    ::setenv("BOPERT_THREADS", "4", 1);
    const RunRecord parallel = run_scenario(sc);
    ::unsetenv("BOPERT_THREADS");
    REQUIRE(serial.tables.size() == parallel.tables.size());
    for (std::size_t i = 0; i < serial.tables.size(); ++i)
        REQUIRE(serial.tables[i].text == parallel.tables[i].text);
}

TEST_CASE("emit, reload, and re-verify") {
    const Scenario sc = mini_scenario(ScenarioKind::BoConservation);
    const RunRecord record = run_scenario(sc);
    const auto dir = fresh_dir("emit");
    emit_report(record, dir);
    REQUIRE(std::filesystem::exists(dir / "manifest.json"));
    REQUIRE(std::filesystem::exists(dir / "drift.csv"));
    REQUIRE(std::filesystem::exists(dir / "verdicts.txt"));

    SECTION("emission is idempotent") {
        auto read_all = [&](const std::filesystem::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        };
        const std::string first = read_all(dir / "drift.csv");
        emit_report(record, dir);
        REQUIRE(read_all(dir / "drift.csv") == first);
    }
    SECTION("verdicts are reproducible from the tables alone") {
        const RunRecord loaded = load_record(dir);
        REQUIRE(loaded.tables.size() == record.tables.size());
        const auto fresh = reverify(loaded);
        REQUIRE(fresh.size() == record.verdicts.size());
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            REQUIRE(fresh[i].pass == record.verdicts[i].pass);
            REQUIRE_THAT(fresh[i].measured,
                         Catch::Matchers::WithinRel(record.verdicts[i].measured, 1e-12) ||
                             Catch::Matchers::WithinAbs(record.verdicts[i].measured, 1e-300));
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("an empty record emits the manifest alone") {
    RunRecord record;
    record.manifest = json{{"kind", "bo-conservation"},
                           {"params", json::object()},
                           {"tables", json::array()},
                           {"verdicts", json::array()}};
    const auto dir = fresh_dir("empty");
    emit_report(record, dir);
    REQUIRE(std::filesystem::exists(dir / "manifest.json"));
    std::size_t entries = 0;
    for (const auto& unused : std::filesystem::directory_iterator(dir)) {
        (void)unused;
        ++entries;
    }
    REQUIRE(entries == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("records with missing tables fail to load") {
    const Scenario sc = mini_scenario(ScenarioKind::BoConservation);
    const RunRecord record = run_scenario(sc);
    const auto dir = fresh_dir("missing");
    emit_report(record, dir);
    std::filesystem::remove(dir / "drift.csv");
    REQUIRE_THROWS_AS(load_record(dir), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("scenario-level parallelism cap") {
    ::setenv("BOPERT_THREADS", "3", 1);
    REQUIRE(thread_cap() == 3);
    ::setenv("BOPERT_THREADS", "bogus", 1);
    REQUIRE(thread_cap() >= 1);  // falls back to hardware concurrency
    ::unsetenv("BOPERT_THREADS");
    REQUIRE(thread_cap() >= 1);
}

TEST_CASE("module errors become failing verdicts") {
    const auto dir = fresh_dir("badfile");
    std::ofstream(dir / "u0.json") << "{ not json";
    Config cfg;
    cfg.set("data.kind", "file");
    cfg.set("data.file", (dir / "u0.json").string());
    cfg.set("solver.N", "8");
    cfg.set("solver.T", "0.01");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::Evolve);
    const RunRecord record = run_scenario(sc);  // must not throw
    REQUIRE_FALSE(record.all_pass());
    REQUIRE_FALSE(record.verdicts.empty());
    REQUIRE_FALSE(record.verdicts.front().note.empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("evolve scenario records invariants and snapshots") {
    Scenario sc = mini_scenario(ScenarioKind::Evolve);
    sc.write_binary = true;
    const RunRecord record = run_scenario(sc);
    REQUIRE(record.all_pass());
    REQUIRE(record.json_artifacts.size() == 1);
    REQUIRE(record.binary_artifacts.size() == 1);
    const Trajectory back = trajectory_from_json(record.json_artifacts.front().second);
    REQUIRE(back.states.size() == back.times.size());
    // a(0) = 0 here, so the mean-conservation verdict must be present
    bool has_mean_verdict = false;
    for (const auto& v : record.verdicts) has_mean_verdict |= v.name.find("mean") != std::string::npos;
    REQUIRE(has_mean_verdict);
}

TEST_CASE("gauge-check scenario at reduced size") {
    Config cfg;
    cfg.set("solver.N", "32");
    cfg.set("solver.T", "0.2");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::GaugeCheck);
    const RunRecord record = run_scenario(sc);
    REQUIRE(record.all_pass());
    const auto gauge = csv::parse(table_named(record, "gauge").text);
    const int diff_col = gauge.col("l2_diff");
    REQUIRE(gauge.value(gauge.rows.size() - 1, diff_col) <= 1e-8);
}

TEST_CASE("exp-bound scenario structure") {
    Config cfg;
    cfg.set("solver.N", "16");
    cfg.set("solver.T", "0.2");
    cfg.set("solver.dt", "0.001");
    cfg.set("beta.M", "24");
    cfg.set("symbol.name", "rayleigh");
    cfg.set("symbol.gamma", "-1");
    cfg.set("expbound.kmax", "0.001");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::ExpBound);
    const RunRecord record = run_scenario(sc);
    INFO(verdict_summary(record.verdicts));
    REQUIRE(record.all_pass());
    const auto kfit = csv::parse(table_named(record, "kfit").text);
    REQUIRE(kfit.rows.size() == 3);  // base, half-dt, double-M
    bool has_cap = false;
    for (const auto& v : record.verdicts) has_cap |= v.name.find("cap") != std::string::npos;
    REQUIRE(has_cap);
}

TEST_CASE("ilw-limit scenario at reduced size") {
    Config cfg;
    cfg.set("solver.N", "32");
    cfg.set("solver.T", "0.1");
    cfg.set("solver.sample_every", "20");
    cfg.set("ladder.deltas", "2,4");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::IlwLimit);
    const RunRecord record = run_scenario(sc);
    INFO(verdict_summary(record.verdicts));
    REQUIRE(record.all_pass());
    const auto conv = csv::parse(table_named(record, "convergence").text);
    REQUIRE(conv.rows.size() == 2);
    REQUIRE(conv.value(0, conv.col("sup_err_boosted")) >
            conv.value(1, conv.col("sup_err_boosted")));
}

TEST_CASE("symbol-audit scenario") {
    const Scenario sc = scenario_from_config(Config{}, ScenarioKind::SymbolAudit);
    const RunRecord record = run_scenario(sc);
    INFO(verdict_summary(record.verdicts));
    REQUIRE(record.all_pass());
    REQUIRE(record.verdicts.size() == 4);
}

TEST_CASE("isospectral scenario at reduced size") {
    Config cfg;
    cfg.set("solver.N", "16");
    cfg.set("solver.T", "0.1");
    cfg.set("solver.dt", "0.001");
    cfg.set("beta.M", "48");
    cfg.set("isospectral.count", "6");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::Isospectral);
    const RunRecord record = run_scenario(sc);
    INFO(verdict_summary(record.verdicts));
    REQUIRE(record.all_pass());
}

TEST_CASE("tightness scenario at reduced size") {
    Config cfg;
    cfg.set("solver.N", "32");
    cfg.set("solver.T", "0.1");
    cfg.set("solver.dt", "0.001");
    cfg.set("solver.sample_every", "50");
    cfg.set("beta.M", "64");
    cfg.set("ladder.deltas", "1,2");
    const Scenario sc = scenario_from_config(cfg, ScenarioKind::Tightness);
    const RunRecord record = run_scenario(sc);
    INFO(verdict_summary(record.verdicts));
    REQUIRE(record.all_pass());
    const auto tight = csv::parse(table_named(record, "tightness").text);
    REQUIRE(static_cast<int>(tight.value(tight.rows.size() - 1, tight.col("cutoff"))) == 16);
}
