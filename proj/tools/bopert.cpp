// Command-line front end: scenario execution, report emission, and record
// re-verification.  Exit code 0 iff every verdict of the run passes.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bopert/config.hpp"
#include "bopert/scenario.hpp"
#include "bopert/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::vector<std::string> overrides;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value configuration file");
    cmd->add_option("--out", args.out_dir, "output directory for the run record");
    cmd->add_option("--seed", args.seed, "seed override (run.seed)");
    cmd->add_option("--override", args.overrides, "repeatable key=value override")
        ->take_all();
}

int run_scenario_command(bopert::ScenarioKind default_kind,
                         const std::vector<bopert::ScenarioKind>& allowed,
                         const CommonArgs& args) {
    bopert::Config cfg;
    if (!args.config_path.empty()) cfg = bopert::Config::from_file(args.config_path);
    for (const auto& o : args.overrides) cfg.apply_override(o);
    if (!args.seed.empty()) cfg.set("run.seed", args.seed);
    if (!args.out_dir.empty()) cfg.set("run.out", args.out_dir);

    bopert::ScenarioKind kind = default_kind;
    if (cfg.has("scenario.kind"))
        kind = bopert::scenario_kind_from_string(cfg.get_string("scenario.kind", ""));
    if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end())
        throw bopert::ConfigError(std::string("scenario.kind '") + bopert::to_string(kind) +
                                  "' is not valid for this subcommand");

    const bopert::Scenario sc = bopert::scenario_from_config(cfg, kind);
    const bopert::RunRecord record = bopert::run_scenario(sc);
    bopert::emit_report(record, sc.out_dir);
    std::fputs(bopert::verdict_summary(record.verdicts).c_str(), stdout);
    std::printf("record written to %s\n", sc.out_dir.c_str());
    return record.all_pass() ? 0 : 1;
}

int run_report_command(const std::string& in_dir, const std::string& out_dir) {
    const bopert::RunRecord record = bopert::load_record(in_dir);
    const std::vector<bopert::Verdict> fresh = bopert::reverify(record);
    std::fputs(bopert::verdict_summary(fresh).c_str(), stdout);

    bool consistent = fresh.size() == record.verdicts.size();
    for (std::size_t i = 0; consistent && i < fresh.size(); ++i)
        consistent = fresh[i].pass == record.verdicts[i].pass;
    if (!consistent) std::printf("note: recomputed verdicts disagree with the stored manifest\n");

    if (!out_dir.empty()) {
        bopert::emit_report(record, out_dir);
        std::printf("record re-emitted to %s\n", out_dir.c_str());
    }
    bool all = consistent;
    for (const auto& v : fresh) all = all && v.pass;
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    using bopert::ScenarioKind;

    CLI::App app{"spectral experiments for zeroth-order perturbations of the "
                 "Benjamin-Ono flow on the torus"};
    app.set_version_flag("--version", bopert::version_string);
    app.require_subcommand(1);

    CommonArgs evolve_args, beta_args, converge_args, gauge_args, audit_args;
    auto* evolve_cmd =
        app.add_subcommand("evolve", "integrate one initial datum and store the trajectory");
    add_common_options(evolve_cmd, evolve_args);
    auto* beta_cmd = app.add_subcommand(
        "beta", "conserved-quantity drift reports along a trajectory "
                "(kinds: bo-conservation, exp-bound, isospectral)");
    add_common_options(beta_cmd, beta_args);
    auto* converge_cmd = app.add_subcommand(
        "converge", "depth-ladder experiments (kinds: ilw-limit, tightness)");
    add_common_options(converge_cmd, converge_args);
    auto* gauge_cmd =
        app.add_subcommand("gauge-check", "compare direct and zero-mean-gauge evolutions");
    add_common_options(gauge_cmd, gauge_args);
    auto* audit_cmd = app.add_subcommand("symbol-audit", "structural checks on shipped symbols");
    add_common_options(audit_cmd, audit_args);

    std::string report_in, report_out;
    auto* report_cmd =
        app.add_subcommand("report", "re-verify a stored run record from its tables");
    report_cmd->add_option("--in", report_in, "directory holding manifest.json")->required();
    report_cmd->add_option("--out", report_out, "optional directory to re-emit the record");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve_cmd->parsed())
            return run_scenario_command(ScenarioKind::Evolve, {ScenarioKind::Evolve}, evolve_args);
        if (beta_cmd->parsed())
            return run_scenario_command(
                ScenarioKind::BoConservation,
                {ScenarioKind::BoConservation, ScenarioKind::ExpBound, ScenarioKind::Isospectral},
                beta_args);
        if (converge_cmd->parsed())
            return run_scenario_command(ScenarioKind::IlwLimit,
                                        {ScenarioKind::IlwLimit, ScenarioKind::Tightness},
                                        converge_args);
        if (gauge_cmd->parsed())
            return run_scenario_command(ScenarioKind::GaugeCheck, {ScenarioKind::GaugeCheck},
                                        gauge_args);
        if (audit_cmd->parsed())
            return run_scenario_command(ScenarioKind::SymbolAudit, {ScenarioKind::SymbolAudit},
                                        audit_args);
        if (report_cmd->parsed()) return run_report_command(report_in, report_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
