#include "cimflow/json_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cimflow/common.hpp"

namespace cimflow {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError("unknown field '" + it.key() + "' in " + where);
}

json parse_doc(const std::string& text, const std::string& what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed JSON in " + what);
    if (!doc.is_object()) throw ParseError(what + " must be a JSON object");
    return doc;
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string())
        throw ParseError("field '" + key + "' in " + where + " must be a string");
    return obj[key].get<std::string>();
}

std::int64_t get_int(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError("missing field '" + key + "' in " + where);
    if (!obj[key].is_number_integer())
        throw ParseError("field '" + key + "' in " + where + " must be an integer");
    return obj[key].get<std::int64_t>();
}

std::int64_t get_int_or(const json& obj, const std::string& key, std::int64_t fallback,
                        const std::string& where) {
    return obj.contains(key) ? get_int(obj, key, where) : fallback;
}

double get_num_or(const json& obj, const std::string& key, double fallback,
                  const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ParseError("field '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

bool get_bool_or(const json& obj, const std::string& key, bool fallback,
                 const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean())
        throw ParseError("field '" + key + "' in " + where + " must be a boolean");
    return obj[key].get<bool>();
}

// Sizes: a bare integer is bits; "<n>KB" scales by 8*1024.
std::int64_t size_bits(const json& v, const std::string& where) {
    if (v.is_number_integer()) {
        std::int64_t bits = v.get<std::int64_t>();
        if (bits <= 0) throw ValidationError("size in " + where + " must be positive");
        return bits;
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t pos = 0;
        long long num = 0;
        try {
            num = std::stoll(s, &pos);
        } catch (...) {
            throw ParseError("bad size '" + s + "' in " + where);
        }
        if (s.substr(pos) != "KB" || num <= 0)
            throw ParseError("bad size '" + s + "' in " + where + " (want bits or '<n>KB')");
        return num * static_cast<std::int64_t>(kBitsPerKB);
    }
    throw ParseError("size in " + where + " must be an integer bit count or '<n>KB'");
}

std::int64_t get_size(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError("missing field '" + key + "' in " + where);
    return size_bits(obj[key], where + "." + key);
}

// Candidate list: explicit array, or {"min": a, "max": b} for integer ranges.
std::vector<std::int64_t> candidate_list(const json& v, bool sizes, const std::string& where) {
    std::vector<std::int64_t> out;
    if (v.is_array()) {
        for (const auto& e : v)
            out.push_back(sizes ? size_bits(e, where) : [&] {
                if (!e.is_number_integer())
                    throw ParseError("candidate in " + where + " must be an integer");
                return e.get<std::int64_t>();
            }());
    } else if (v.is_object() && !sizes) {
        reject_unknown(v, {"min", "max"}, where);
        std::int64_t lo = get_int(v, "min", where), hi = get_int(v, "max", where);
        if (lo > hi) throw ValidationError("min > max in " + where);
        for (std::int64_t x = lo; x <= hi; ++x) out.push_back(x);
    } else {
        throw ParseError(where + " must be an array" + (sizes ? "" : " or {min, max}"));
    }
    if (out.empty()) throw ValidationError(where + " is empty");
    return out;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write '" + tmp + "'");
        out << content;
        if (!out.good()) throw ParseError("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ParseError("cannot rename '" + tmp + "' to '" + path + "'");
}

MacroSpec parse_macro_json(const std::string& text) {
    json doc = parse_doc(text, "macro file");
    reject_unknown(doc,
                   {"name", "kind", "al", "pc", "scr", "icw", "wuw", "n_input_bitline",
                    "dac_precision", "simultaneous_compute_update", "freq_mhz", "e_mac_pj",
                    "a_compute_mm2", "a_bank_mm2"},
                   "macro file");
    MacroSpec m;
    m.name = get_string(doc, "name", "macro", "macro file");
    const std::string kind = get_string(doc, "kind", "digital", "macro file");
    if (kind == "digital")
        m.kind = MacroKind::digital;
    else if (kind == "analog")
        m.kind = MacroKind::analog;
    else
        throw ParseError("macro kind must be 'digital' or 'analog'");
    m.al = get_int(doc, "al", "macro file");
    m.pc = get_int(doc, "pc", "macro file");
    m.scr = get_int_or(doc, "scr", 1, "macro file");
    m.wuw = get_int(doc, "wuw", "macro file");
    m.n_input_bitline = get_int_or(doc, "n_input_bitline", 0, "macro file");
    m.dac_precision = get_int_or(doc, "dac_precision", 0, "macro file");
    m.simultaneous_compute_update =
        get_bool_or(doc, "simultaneous_compute_update", false, "macro file");
    m.freq_mhz = get_num_or(doc, "freq_mhz", 1000.0, "macro file");
    m.e_mac_pj = get_num_or(doc, "e_mac_pj", 0.0, "macro file");
    m.a_compute_mm2 = get_num_or(doc, "a_compute_mm2", 0.0, "macro file");
    m.a_bank_mm2 = get_num_or(doc, "a_bank_mm2", 0.0, "macro file");
    m.icw = get_int_or(doc, "icw", derive_icw(m), "macro file");
    validate_macro(m);
    return m;
}

MacroSpec load_macro(const std::string& path) {
    try {
        return parse_macro_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

AcceleratorConfig parse_config_json(const std::string& text, const MacroSpec& macro) {
    json doc = parse_doc(text, "config file");
    reject_unknown(doc, {"name", "mr", "mc", "scr", "bw", "is_size", "os_size"},
                   "config file");
    AcceleratorConfig cfg;
    cfg.macro = macro;
    cfg.name = get_string(doc, "name", "config", "config file");
    cfg.mr = get_int(doc, "mr", "config file");
    cfg.mc = get_int(doc, "mc", "config file");
    cfg.macro.scr = get_int_or(doc, "scr", macro.scr, "config file");
    cfg.bw = get_int(doc, "bw", "config file");
    cfg.is_size = get_size(doc, "is_size", "config file");
    cfg.os_size = get_size(doc, "os_size", "config file");
    validate_config(cfg);
    return cfg;
}

AcceleratorConfig load_config(const std::string& path, const MacroSpec& macro) {
    try {
        return parse_config_json(read_file(path), macro);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

CostCoefficients parse_coeffs_json(const std::string& text) {
    json doc = parse_doc(text, "coefficient file");
    reject_unknown(doc,
                   {"name", "e_is_rd", "e_is_wr", "e_os_rd", "e_os_wr", "e_ema",
                    "e_cim_update", "a_is", "a_os", "a_fixed"},
                   "coefficient file");
    CostCoefficients c;
    c.name = get_string(doc, "name", "coeffs", "coefficient file");
    c.e_is_rd = get_num_or(doc, "e_is_rd", 0.0, "coefficient file");
    c.e_is_wr = get_num_or(doc, "e_is_wr", 0.0, "coefficient file");
    c.e_os_rd = get_num_or(doc, "e_os_rd", 0.0, "coefficient file");
    c.e_os_wr = get_num_or(doc, "e_os_wr", 0.0, "coefficient file");
    c.e_ema = get_num_or(doc, "e_ema", 0.0, "coefficient file");
    c.e_cim_update = get_num_or(doc, "e_cim_update", 0.0, "coefficient file");
    c.a_is = get_num_or(doc, "a_is", 0.0, "coefficient file");
    c.a_os = get_num_or(doc, "a_os", 0.0, "coefficient file");
    c.a_fixed = get_num_or(doc, "a_fixed", 0.0, "coefficient file");
    for (double v : {c.e_is_rd, c.e_is_wr, c.e_os_rd, c.e_os_wr, c.e_ema, c.e_cim_update,
                     c.a_is, c.a_os, c.a_fixed})
        if (v < 0.0) throw ValidationError("coefficients must be non-negative");
    return c;
}

CostCoefficients load_coeffs(const std::string& path) {
    try {
        return parse_coeffs_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

Workload load_workload(const std::string& path) {
    try {
        return parse_workload(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

ExploreSpec parse_space_json(const std::string& text) {
    json doc = parse_doc(text, "space file");
    reject_unknown(doc,
                   {"name", "macro", "bw", "mr", "mc", "scr", "is_size", "os_size", "start",
                    "schedule", "objective", "budget_mm2", "seed"},
                   "space file");
    ExploreSpec spec;
    spec.name = get_string(doc, "name", "space", "space file");
    if (!doc.contains("macro") || !doc["macro"].is_object())
        throw ParseError("space file needs an inline 'macro' object");
    spec.space.macro = parse_macro_json(doc["macro"].dump());
    spec.space.bw = get_int(doc, "bw", "space file");
    if (spec.space.bw <= 0) throw ValidationError("space bw must be positive");
    for (const char* key : {"mr", "mc", "scr", "is_size", "os_size"})
        if (!doc.contains(key))
            throw ParseError(std::string("missing field '") + key + "' in space file");
    spec.space.mr = candidate_list(doc["mr"], false, "space.mr");
    spec.space.mc = candidate_list(doc["mc"], false, "space.mc");
    spec.space.scr = candidate_list(doc["scr"], false, "space.scr");
    spec.space.is_size = candidate_list(doc["is_size"], true, "space.is_size");
    spec.space.os_size = candidate_list(doc["os_size"], true, "space.os_size");
    if (doc.contains("start")) {
        const json& st = doc["start"];
        if (!st.is_object()) throw ParseError("space start must be an object");
        reject_unknown(st, {"mr", "mc", "scr", "is_size", "os_size"}, "space.start");
        AcceleratorConfig cfg;
        cfg.macro = spec.space.macro;
        cfg.mr = get_int(st, "mr", "space.start");
        cfg.mc = get_int(st, "mc", "space.start");
        cfg.macro.scr = get_int(st, "scr", "space.start");
        cfg.bw = spec.space.bw;
        cfg.is_size = get_size(st, "is_size", "space.start");
        cfg.os_size = get_size(st, "os_size", "space.start");
        cfg.name = "start";
        validate_config(cfg);
        spec.space.start = cfg;
    }
    if (doc.contains("schedule")) {
        const json& sc = doc["schedule"];
        if (!sc.is_object()) throw ParseError("space schedule must be an object");
        reject_unknown(sc, {"t0_frac", "alpha", "moves_per_temp", "max_evals", "patience"},
                       "space.schedule");
        spec.schedule.t0_frac = get_num_or(sc, "t0_frac", spec.schedule.t0_frac, "schedule");
        spec.schedule.alpha = get_num_or(sc, "alpha", spec.schedule.alpha, "schedule");
        spec.schedule.moves_per_temp = static_cast<int>(
            get_int_or(sc, "moves_per_temp", spec.schedule.moves_per_temp, "schedule"));
        spec.schedule.max_evals =
            static_cast<int>(get_int_or(sc, "max_evals", spec.schedule.max_evals, "schedule"));
        spec.schedule.patience =
            static_cast<int>(get_int_or(sc, "patience", spec.schedule.patience, "schedule"));
        if (spec.schedule.alpha <= 0.0 || spec.schedule.alpha >= 1.0)
            throw ValidationError("schedule alpha must be in (0, 1)");
        if (spec.schedule.moves_per_temp <= 0 || spec.schedule.max_evals <= 0 ||
            spec.schedule.patience <= 0)
            throw ValidationError("schedule counts must be positive");
    }
    if (doc.contains("objective"))
        spec.objective = parse_objective(get_string(doc, "objective", "", "space file"));
    if (doc.contains("budget_mm2")) {
        spec.budget_mm2 = get_num_or(doc, "budget_mm2", 0.0, "space file");
        if (*spec.budget_mm2 <= 0.0) throw ValidationError("budget_mm2 must be positive");
    }
    if (doc.contains("seed"))
        spec.seed = static_cast<std::uint64_t>(get_int(doc, "seed", "space file"));
    return spec;
}

ExploreSpec load_space(const std::string& path) {
    try {
        return parse_space_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

SweepSpec parse_sweep_json(const std::string& text) {
    json doc = parse_doc(text, "sweep file");
    reject_unknown(doc, {"name", "points"}, "sweep file");
    SweepSpec spec;
    spec.name = get_string(doc, "name", "sweep", "sweep file");
    if (!doc.contains("points") || !doc["points"].is_array() || doc["points"].empty())
        throw ParseError("sweep file needs a non-empty 'points' array");
    std::size_t index = 0;
    for (const auto& jp : doc["points"]) {
        const std::string where = "points[" + std::to_string(index++) + "]";
        if (!jp.is_object()) throw ParseError(where + " must be an object");
        reject_unknown(jp, {"label", "patch"}, where);
        SweepPoint p;
        p.label = get_string(jp, "label", std::to_string(index - 1), where);
        if (!jp.contains("patch") || !jp["patch"].is_object())
            throw ParseError(where + " needs a 'patch' object");
        for (auto it = jp["patch"].begin(); it != jp["patch"].end(); ++it) {
            const std::string& key = it.key();
            if (key == "is_size" || key == "os_size")
                p.patch.emplace_back(key, size_bits(it.value(), where + "." + key));
            else if (key == "mr" || key == "mc" || key == "scr" || key == "bw") {
                if (!it.value().is_number_integer())
                    throw ParseError(where + "." + key + " must be an integer");
                p.patch.emplace_back(key, it.value().get<std::int64_t>());
            } else {
                throw ParseError("unknown patch key '" + key + "' in " + where);
            }
        }
        spec.points.push_back(std::move(p));
    }
    return spec;
}

SweepSpec load_sweep(const std::string& path) {
    try {
        return parse_sweep_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

AcceleratorConfig apply_patch(const AcceleratorConfig& base, const SweepPoint& point) {
    AcceleratorConfig cfg = base;
    for (const auto& [key, value] : point.patch) {
        if (key == "mr")
            cfg.mr = value;
        else if (key == "mc")
            cfg.mc = value;
        else if (key == "scr")
            cfg.macro.scr = value;
        else if (key == "bw")
            cfg.bw = value;
        else if (key == "is_size")
            cfg.is_size = value;
        else if (key == "os_size")
            cfg.os_size = value;
    }
    cfg.name = base.name + "@" + point.label;
    validate_config(cfg);
    return cfg;
}

namespace {

json config_to_json(const AcceleratorConfig& cfg) {
    return json{{"name", cfg.name},          {"macro", cfg.macro.name},
                {"mr", cfg.mr},              {"mc", cfg.mc},
                {"scr", cfg.macro.scr},      {"bw", cfg.bw},
                {"is_size_bits", cfg.is_size}, {"os_size_bits", cfg.os_size}};
}

json report_to_jobj(const SimReport& rep) {
    json traffic{{"ext_rd", rep.traffic_bits.ext_rd}, {"ext_wr", rep.traffic_bits.ext_wr},
                 {"is_rd", rep.traffic_bits.is_rd},   {"is_wr", rep.traffic_bits.is_wr},
                 {"os_rd", rep.traffic_bits.os_rd},   {"os_wr", rep.traffic_bits.os_wr},
                 {"cim_wr", rep.traffic_bits.cim_wr}};
    return json{{"cycles", rep.cycles},
                {"wall_time_us", rep.wall_time_us},
                {"energy_pj", rep.energy_pj},
                {"energy_breakdown", rep.energy_breakdown},
                {"ema_psum_pj", rep.ema_psum_pj},
                {"traffic_bits", traffic},
                {"macs", rep.macs},
                {"cim_utilization", rep.cim_utilization},
                {"stall_cycles", rep.stall_cycles},
                {"xfer_busy_cycles", rep.xfer_busy_cycles},
                {"compute_busy_cycles", rep.compute_busy_cycles},
                {"instr_counts", rep.instr_counts},
                {"psum_spill", rep.psum_spill}};
}

}  // namespace

std::string config_json(const AcceleratorConfig& cfg) { return config_to_json(cfg).dump(2); }

std::string sim_report_json(const SimReport& rep) { return report_to_jobj(rep).dump(2); }

std::string sim_report_table(const SimReport& rep) {
    std::ostringstream os;
    auto row = [&](const std::string& k, const std::string& v) {
        os << "  " << k;
        for (std::size_t i = k.size(); i < 22; ++i) os << ' ';
        os << v << "\n";
    };
    auto num = [](double v) {
        std::ostringstream s;
        s << v;
        return s.str();
    };
    row("cycles", std::to_string(rep.cycles));
    row("wall_time_us", num(rep.wall_time_us));
    row("energy_pj", num(rep.energy_pj));
    for (const auto& [k, v] : rep.energy_breakdown) row("  " + k, num(v));
    row("macs", std::to_string(rep.macs));
    row("cim_utilization", num(rep.cim_utilization));
    for (const auto& [k, v] : rep.stall_cycles) row("stall:" + k, std::to_string(v));
    row("ext_rd_bits", std::to_string(rep.traffic_bits.ext_rd));
    row("ext_wr_bits", std::to_string(rep.traffic_bits.ext_wr));
    row("is_rd_bits", std::to_string(rep.traffic_bits.is_rd));
    row("is_wr_bits", std::to_string(rep.traffic_bits.is_wr));
    row("os_rd_bits", std::to_string(rep.traffic_bits.os_rd));
    row("os_wr_bits", std::to_string(rep.traffic_bits.os_wr));
    row("cim_wr_bits", std::to_string(rep.traffic_bits.cim_wr));
    row("psum_spill", rep.psum_spill ? "true" : "false");
    return os.str();
}

std::string breakdown_csv(const SimReport& rep) {
    std::ostringstream os;
    os << "category,energy_pj\n";
    for (const auto& [k, v] : rep.energy_breakdown) os << k << "," << v << "\n";
    os << "ema_psum," << rep.ema_psum_pj << "\n";
    return os.str();
}

namespace {

json eval_to_jobj(const AcceleratorConfig& cfg, Objective objective, const EvalResult& ev) {
    json per_op = json::array();
    for (const OpChoice& c : ev.per_op)
        per_op.push_back(json{{"id", c.op_id},
                              {"strategy", strategy_name(c.strategy)},
                              {"multiplicity", c.multiplicity},
                              {"cycles", c.report.cycles},
                              {"energy_pj", c.report.energy_pj},
                              {"psum_spill", c.report.psum_spill}});
    return json{{"config", config_to_json(cfg)},
                {"objective", objective_name(objective)},
                {"objective_value", ev.objective_value},
                {"objective_scalar", ev.objective_scalar},
                {"total_ops", ev.total_ops},
                {"area_mm2", ev.area_mm2},
                {"per_op_evaluations", ev.per_op_evaluations},
                {"per_op", per_op},
                {"aggregate", report_to_jobj(ev.aggregate)}};
}

}  // namespace

std::string eval_result_json(const AcceleratorConfig& cfg, Objective objective,
                             const EvalResult& ev) {
    return eval_to_jobj(cfg, objective, ev).dump(2);
}

std::string eval_result_table(const AcceleratorConfig& cfg, Objective objective,
                              const EvalResult& ev) {
    std::ostringstream os;
    os << "config " << cfg.name << "  area " << ev.area_mm2 << " mm2  objective("
       << objective_name(objective) << ") " << ev.objective_value
       << (objective == Objective::energy_eff ? " pJ/OP" : " GOPS") << "\n";
    os << "per-op strategy choices:\n";
    for (const OpChoice& c : ev.per_op)
        os << "  " << c.op_id << " x" << c.multiplicity << "  "
           << strategy_name(c.strategy) << "  cycles " << c.report.cycles << "  energy_pj "
           << c.report.energy_pj << (c.report.psum_spill ? "  [psum spill]" : "") << "\n";
    os << "aggregate:\n" << sim_report_table(ev.aggregate);
    return os.str();
}

std::string explore_result_json(const ExploreResult& res) {
    json per_op = json::object();
    for (const OpChoice& c : res.per_op) per_op[c.op_id] = strategy_name(c.strategy);
    json doc{{"best_config", config_to_json(res.best_config)},
             {"objective", objective_name(res.objective)},
             {"objective_value", res.objective_value},
             {"objective_scalar", res.objective_scalar},
             {"energy_pj", res.energy_pj},
             {"gops", res.gops},
             {"area_mm2", res.area_mm2},
             {"area_budget_mm2", res.area_budget_mm2},
             {"seed", res.seed},
             {"evaluations", res.evaluations},
             {"per_op_strategy", per_op},
             {"schedule", json{{"t0_frac", res.schedule.t0_frac},
                               {"alpha", res.schedule.alpha},
                               {"moves_per_temp", res.schedule.moves_per_temp},
                               {"max_evals", res.schedule.max_evals},
                               {"patience", res.schedule.patience}}},
             {"prune", json{{"raw_points", res.prune.raw_points},
                            {"kept_points", res.prune.kept_points},
                            {"pruned_fraction", res.prune.pruned_fraction()}}},
             {"history_entries", res.history.size()}};
    return doc.dump(2);
}

std::string history_csv(const ExploreResult& res) {
    std::ostringstream os;
    os << "iteration,mr,mc,scr,is_bits,os_bits,objective_scalar,objective_value,accepted,"
          "best_so_far\n";
    double best = 0.0;
    bool first = true;
    for (const HistoryEntry& h : res.history) {
        best = first ? h.objective_scalar : std::min(best, h.objective_scalar);
        first = false;
        os << h.iteration << "," << h.candidate.mr << "," << h.candidate.mc << ","
           << h.candidate.macro.scr << "," << h.candidate.is_size << ","
           << h.candidate.os_size << "," << h.objective_scalar << "," << h.objective_value
           << "," << (h.accepted ? 1 : 0) << "," << best << "\n";
    }
    return os.str();
}

std::string manifest_json(const std::string& command,
                          const std::vector<std::string>& inputs, std::uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>& resolved) {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json params = json::object();
    for (const auto& [k, v] : resolved) params[k] = v;
    json doc{{"command", command}, {"inputs", inputs},          {"seed", seed},
             {"tool_version", kVersion}, {"timestamp", stamp}, {"resolved", params}};
    return doc.dump(2);
}

}  // namespace cimflow
