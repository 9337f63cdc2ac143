#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cimflow/common.hpp"
#include "cimflow/compiler.hpp"
#include "cimflow/explorer.hpp"
#include "cimflow/json_io.hpp"
#include "cimflow/oracle.hpp"

using namespace cimflow;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 1;
    int jobs = 1;  // accepted for interface stability; execution is sequential
    std::string out_dir = ".";
    bool dump_plan = false;
    bool breakdown = false;
};

std::string join_argv(int argc, char** argv) {
    std::ostringstream os;
    for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
    return os.str();
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    return (std::filesystem::path(g.out_dir) / name).string();
}

void emit(const GlobalOpts& g, const std::string& name, const std::string& content,
          const std::string& command, const std::vector<std::string>& inputs,
          const std::vector<std::pair<std::string, std::string>>& resolved) {
    const std::string path = out_path(g, name);
    write_file_atomic(path, content);
    write_file_atomic(path + ".manifest.json", manifest_json(command, inputs, g.seed, resolved));
    std::cout << "wrote " << path << "\n";
}

std::vector<MappingStrategy> strategy_menu(const std::string& flag) {
    if (flag == "auto" || flag == "all") {
        auto all = enumerate_strategies();
        return {all.begin(), all.end()};
    }
    std::vector<MappingStrategy> menu;
    std::stringstream ss(flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) menu.push_back(parse_strategy(item));
    }
    if (menu.empty()) throw ParseError("empty strategy set");
    return menu;
}

struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const VerificationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const InfeasibleBudgetError& e) {
        std::cerr << "error: infeasible budget: " << e.what() << "\n";
        return 4;
    } catch (const InfeasiblePlanError& e) {
        std::cerr << "error: infeasible plan: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

void dump_plans(const GlobalOpts& g, const AcceleratorConfig& cfg, const Workload& w,
                const EvalResult& ev) {
    for (const OpChoice& c : ev.per_op)
        for (const GemmOp& op : w.ops)
            if (op.id == c.op_id) {
                TilingPlan plan = plan_tiling(op, cfg, c.strategy);
                write_file_atomic(out_path(g, "plan_" + c.op_id + ".json"),
                                  plan_to_json(plan));
                break;
            }
}

SimReport report_from_jobj(const nlohmann::json& j) {
    SimReport rep;
    rep.cycles = j.value("cycles", std::int64_t{0});
    rep.wall_time_us = j.value("wall_time_us", 0.0);
    rep.energy_pj = j.value("energy_pj", 0.0);
    if (j.contains("energy_breakdown"))
        rep.energy_breakdown =
            j["energy_breakdown"].get<std::map<std::string, double>>();
    rep.ema_psum_pj = j.value("ema_psum_pj", 0.0);
    if (j.contains("traffic_bits")) {
        const auto& t = j["traffic_bits"];
        rep.traffic_bits.ext_rd = t.value("ext_rd", std::int64_t{0});
        rep.traffic_bits.ext_wr = t.value("ext_wr", std::int64_t{0});
        rep.traffic_bits.is_rd = t.value("is_rd", std::int64_t{0});
        rep.traffic_bits.is_wr = t.value("is_wr", std::int64_t{0});
        rep.traffic_bits.os_rd = t.value("os_rd", std::int64_t{0});
        rep.traffic_bits.os_wr = t.value("os_wr", std::int64_t{0});
        rep.traffic_bits.cim_wr = t.value("cim_wr", std::int64_t{0});
    }
    rep.macs = j.value("macs", std::int64_t{0});
    rep.cim_utilization = j.value("cim_utilization", 0.0);
    if (j.contains("stall_cycles"))
        rep.stall_cycles = j["stall_cycles"].get<std::map<std::string, std::int64_t>>();
    rep.xfer_busy_cycles = j.value("xfer_busy_cycles", std::int64_t{0});
    rep.compute_busy_cycles = j.value("compute_busy_cycles", std::int64_t{0});
    if (j.contains("instr_counts"))
        rep.instr_counts = j["instr_counts"].get<std::map<std::string, std::int64_t>>();
    rep.psum_spill = j.value("psum_spill", false);
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hardware-mapping co-exploration toolkit for SRAM CIM accelerators"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--jobs", g.jobs, "worker cap (reserved; runs are sequential)");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_flag("--dump-plan", g.dump_plan, "write per-op tiling plans");
    app.add_flag("--breakdown", g.breakdown, "write per-category energy CSV");
    const std::string command = join_argv(argc, argv);

    std::string macro_path, config_path, workload_path, coeff_path;
    std::string strategy_flag = "auto", objective_flag, inject_flag = "none";
    std::string space_path, sweep_path, input_path;
    double budget = 0.0;
    bool dump_flow = false;

    CLI::App* sim = app.add_subcommand("simulate", "simulate a workload on one config");
    sim->fallthrough();
    sim->add_option("--macro", macro_path)->required();
    sim->add_option("--config", config_path)->required();
    sim->add_option("--workload", workload_path)->required();
    sim->add_option("--coeffs", coeff_path)->required();
    sim->add_option("--strategy", strategy_flag, "NR-IP-AF style name, list, or 'auto'");
    sim->add_option("--objective", objective_flag, "energy_eff | throughput");

    CLI::App* swp = app.add_subcommand("sweep", "evaluate a list of config patches");
    swp->fallthrough();
    swp->add_option("--sweep", sweep_path)->required();
    swp->add_option("--macro", macro_path)->required();
    swp->add_option("--config", config_path)->required();
    swp->add_option("--workload", workload_path)->required();
    swp->add_option("--coeffs", coeff_path)->required();
    swp->add_option("--objective", objective_flag);

    CLI::App* exp = app.add_subcommand("explore", "simulated-annealing co-exploration");
    exp->fallthrough();
    exp->add_option("--space", space_path)->required();
    exp->add_option("--workload", workload_path)->required();
    exp->add_option("--coeffs", coeff_path)->required();
    exp->add_option("--objective", objective_flag);
    CLI::Option* budget_opt = exp->add_option("--budget", budget, "area budget, mm2");

    CLI::App* val = app.add_subcommand("validate", "verify compiled flows against the oracle");
    val->fallthrough();
    val->add_option("--macro", macro_path)->required();
    val->add_option("--config", config_path)->required();
    val->add_option("--workload", workload_path)->required();
    val->add_option("--strategies", strategy_flag, "comma list or 'all'");
    val->add_option("--inject", inject_flag, "none | delete-cmp | perturb-st-out");
    val->add_flag("--dump-flow", dump_flow, "write flow text and trace CSV per pair");

    CLI::App* rep = app.add_subcommand("report", "render a saved report JSON as text");
    rep->fallthrough();
    rep->add_option("--input", input_path)->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed())
        return guarded([&] {
            MacroSpec macro = load_macro(macro_path);
            AcceleratorConfig cfg = load_config(config_path, macro);
            Workload w = merge_operators(load_workload(workload_path));
            CostCoefficients coeffs = load_coeffs(coeff_path);
            Objective obj =
                objective_flag.empty() ? Objective::energy_eff : parse_objective(objective_flag);
            EvalResult ev = evaluate_with(cfg, w, coeffs, obj, strategy_menu(strategy_flag));
            std::cout << eval_result_table(cfg, obj, ev);
            std::vector<std::pair<std::string, std::string>> resolved = {
                {"strategy", strategy_flag}, {"objective", objective_name(obj)}};
            emit(g, "simulate_report.json", eval_result_json(cfg, obj, ev), command,
                 {macro_path, config_path, workload_path, coeff_path}, resolved);
            if (g.breakdown)
                write_file_atomic(out_path(g, "breakdown.csv"), breakdown_csv(ev.aggregate));
            if (g.dump_plan) dump_plans(g, cfg, w, ev);
        });

    if (swp->parsed())
        return guarded([&] {
            SweepSpec spec = load_sweep(sweep_path);
            MacroSpec macro = load_macro(macro_path);
            AcceleratorConfig base = load_config(config_path, macro);
            Workload w = merge_operators(load_workload(workload_path));
            CostCoefficients coeffs = load_coeffs(coeff_path);
            Objective obj =
                objective_flag.empty() ? Objective::throughput : parse_objective(objective_flag);
            std::ostringstream csv;
            csv << "value,latency_cycles,energy_pj,area_mm2\n";
            for (const SweepPoint& p : spec.points) {
                AcceleratorConfig cfg = apply_patch(base, p);
                EvalResult ev = evaluate(cfg, w, coeffs, obj);
                csv << p.label << "," << ev.aggregate.cycles << "," << ev.aggregate.energy_pj
                    << "," << ev.area_mm2 << "\n";
            }
            emit(g, "sweep.csv", csv.str(), command,
                 {sweep_path, macro_path, config_path, workload_path, coeff_path},
                 {{"objective", objective_name(obj)}, {"points", std::to_string(spec.points.size())}});
        });

    if (exp->parsed())
        return guarded([&] {
            ExploreSpec spec = load_space(space_path);
            Workload w = merge_operators(load_workload(workload_path));
            CostCoefficients coeffs = load_coeffs(coeff_path);
            Objective obj = !objective_flag.empty() ? parse_objective(objective_flag)
                            : spec.objective        ? *spec.objective
                                                    : Objective::energy_eff;
            double budget_mm2 = budget_opt->count() ? budget
                                : spec.budget_mm2   ? *spec.budget_mm2
                                                    : 0.0;
            if (budget_mm2 <= 0.0)
                throw ParseError("area budget required (--budget or space file budget_mm2)");
            std::uint64_t seed = app.count("--seed") ? g.seed : spec.seed.value_or(g.seed);
            SearchSpace pruned = prune_space(spec.space, spec.space.bw, spec.space.macro);
            ExploreResult res = anneal(pruned, w, coeffs, obj, budget_mm2, seed, spec.schedule);
            std::cout << "best " << res.best_config.name << "  area " << res.area_mm2
                      << " mm2  objective(" << objective_name(obj) << ") "
                      << res.objective_value
                      << (obj == Objective::energy_eff ? " pJ/OP" : " GOPS") << "  ("
                      << res.evaluations << " evaluations, "
                      << res.prune.pruned_fraction() * 100.0 << "% of raw space pruned)\n";
            std::vector<std::pair<std::string, std::string>> resolved = {
                {"objective", objective_name(obj)},
                {"budget_mm2", std::to_string(budget_mm2)},
                {"space", spec.name},
                {"pruned_points", std::to_string(pruned.points())}};
            emit(g, "explore_result.json", explore_result_json(res), command,
                 {space_path, workload_path, coeff_path}, resolved);
            write_file_atomic(out_path(g, "convergence.csv"), history_csv(res));
        });

    if (val->parsed())
        return guarded([&] {
            MacroSpec macro = load_macro(macro_path);
            AcceleratorConfig cfg = load_config(config_path, macro);
            Workload w = merge_operators(load_workload(workload_path));
            std::vector<MappingStrategy> menu = strategy_menu(strategy_flag);
            if (inject_flag != "none" && inject_flag != "delete-cmp" &&
                inject_flag != "perturb-st-out")
                throw ParseError("unknown --inject mode '" + inject_flag + "'");
            bool all_ok = true;
            int checked = 0;
            for (const GemmOp& op : w.ops)
                for (const MappingStrategy& s : menu) {
                    TilingPlan plan;
                    try {
                        plan = plan_tiling(op, cfg, s);
                    } catch (const InfeasiblePlanError& e) {
                        std::cout << op.id << " " << strategy_name(s) << ": skipped ("
                                  << e.what() << ")\n";
                        continue;
                    }
                    InstructionFlow flow = lower(plan, cfg);
                    if (inject_flag == "delete-cmp") {
                        for (auto it = flow.body.rbegin(); it != flow.body.rend(); ++it)
                            if (it->opcode == Opcode::cmp) {
                                flow.body.erase(std::next(it).base());
                                break;
                            }
                    } else if (inject_flag == "perturb-st-out") {
                        for (auto& ins : flow.body)
                            if (ins.opcode == Opcode::st_out) {
                                ins.sram_addr += flow.header.os_bits;
                                break;
                            }
                    }
                    VerificationReport vr = verify_flow(flow, op, g.seed);
                    ++checked;
                    std::cout << op.id << " " << strategy_name(s) << ": "
                              << (vr.ok() ? "pass" : "FAIL") << "\n";
                    if (!vr.ok()) {
                        std::cout << report_to_text(vr);
                        all_ok = false;
                    }
                    if (dump_flow) {
                        const std::string stem = op.id + "_" + strategy_name(s);
                        write_file_atomic(out_path(g, stem + ".flow.txt"), flow_to_text(flow));
                        write_file_atomic(out_path(g, stem + ".trace.csv"),
                                          trace_to_csv(emit_trace(flow)));
                    }
                }
            if (checked == 0) throw ValidationError("no (op, strategy) pair was checkable");
            if (!all_ok) throw VerificationFailure("one or more flows failed verification");
        });

    if (rep->parsed())
        return guarded([&] {
            nlohmann::json doc = nlohmann::json::parse(read_file(input_path), nullptr, false);
            if (doc.is_discarded() || !doc.is_object())
                throw ParseError(input_path + ": malformed report JSON");
            if (doc.contains("aggregate")) {
                std::cout << "config "
                          << (doc.contains("config") ? doc["config"].value("name", "?") : "?")
                          << "  objective " << doc.value("objective", std::string("?")) << " "
                          << doc.value("objective_value", 0.0) << "\n";
                if (doc.contains("per_op"))
                    for (const auto& c : doc["per_op"])
                        std::cout << "  " << c.value("id", std::string("?")) << "  "
                                  << c.value("strategy", std::string("?")) << "  cycles "
                                  << c.value("cycles", std::int64_t{0}) << "\n";
                std::cout << sim_report_table(report_from_jobj(doc["aggregate"]));
                if (g.breakdown)
                    write_file_atomic(out_path(g, "breakdown.csv"),
                                      breakdown_csv(report_from_jobj(doc["aggregate"])));
            } else {
                std::cout << sim_report_table(report_from_jobj(doc));
            }
        });

    return 0;
}
