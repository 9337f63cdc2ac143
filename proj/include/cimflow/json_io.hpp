#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cimflow/explorer.hpp"
#include "cimflow/hwmodel.hpp"
#include "cimflow/oracle.hpp"
#include "cimflow/workload.hpp"

namespace cimflow {

// File formats are documented with examples in docs/formats.md. All parsers
// reject unknown fields; sizes accept raw bit counts or "<n>KB" strings.

std::string read_file(const std::string& path);            // throws ParseError
void write_file_atomic(const std::string& path, const std::string& content);

MacroSpec parse_macro_json(const std::string& text);
MacroSpec load_macro(const std::string& path);

// Config files carry grid/bus/SRAM sizing plus an optional scr override of
// the macro's plane count.
AcceleratorConfig parse_config_json(const std::string& text, const MacroSpec& macro);
AcceleratorConfig load_config(const std::string& path, const MacroSpec& macro);

CostCoefficients parse_coeffs_json(const std::string& text);
CostCoefficients load_coeffs(const std::string& path);

Workload load_workload(const std::string& path);

// Exploration spec: raw (unpruned) space with an inline macro, plus optional
// schedule/objective/budget/seed defaults that CLI flags may override.
struct ExploreSpec {
    std::string name;
    SearchSpace space;
    AnnealSchedule schedule;
    std::optional<Objective> objective;
    std::optional<double> budget_mm2;
    std::optional<std::uint64_t> seed;
};
ExploreSpec parse_space_json(const std::string& text);
ExploreSpec load_space(const std::string& path);

// Sweep spec: ordered config patches applied to a base config, one CSV row
// emitted per point.
struct SweepPoint {
    std::string label;
    std::vector<std::pair<std::string, std::int64_t>> patch;  // key -> value (sizes in bits)
};
struct SweepSpec {
    std::string name;
    std::vector<SweepPoint> points;
};
SweepSpec parse_sweep_json(const std::string& text);
SweepSpec load_sweep(const std::string& path);
AcceleratorConfig apply_patch(const AcceleratorConfig& base, const SweepPoint& point);

std::string config_json(const AcceleratorConfig& cfg);
std::string sim_report_json(const SimReport& rep);
std::string sim_report_table(const SimReport& rep);
std::string breakdown_csv(const SimReport& rep);
std::string eval_result_json(const AcceleratorConfig& cfg, Objective objective,
                             const EvalResult& ev);
std::string eval_result_table(const AcceleratorConfig& cfg, Objective objective,
                              const EvalResult& ev);
std::string explore_result_json(const ExploreResult& res);
std::string history_csv(const ExploreResult& res);

// Reproducibility sidecar written next to every result file.
std::string manifest_json(const std::string& command,
                          const std::vector<std::string>& inputs, std::uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>& resolved);

}  // namespace cimflow
