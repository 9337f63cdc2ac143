#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cimflow/mapper.hpp"
#include "cimflow/simulator.hpp"
#include "cimflow/workload.hpp"

namespace cimflow {

enum class Objective { energy_eff, throughput };

const char* objective_name(Objective o);
Objective parse_objective(const std::string& s);  // throws ParseError

struct AnnealSchedule {
    double t0_frac = 0.10;  // initial temperature as a fraction of the start objective
    double alpha = 0.95;    // geometric cooling factor per temperature level
    int moves_per_temp = 20;
    int max_evals = 1500;
    int patience = 10;  // temperature levels without improvement before stopping
};

struct PruneStats {
    std::int64_t raw_points = 0;
    std::int64_t kept_points = 0;
    double pruned_fraction() const {
        return raw_points ? 1.0 - double(kept_points) / double(raw_points) : 0.0;
    }
};

// Candidate grid: one fixed macro and bus width, sorted unique candidate
// lists per sized parameter. scr overrides macro.scr per candidate.
struct SearchSpace {
    MacroSpec macro;
    std::int64_t bw = 0;
    std::vector<std::int64_t> mr, mc, scr;
    std::vector<std::int64_t> is_size, os_size;  // bits
    std::optional<AcceleratorConfig> start;
    PruneStats stats;

    std::int64_t points() const {
        return std::int64_t(mr.size()) * std::int64_t(mc.size()) * std::int64_t(scr.size()) *
               std::int64_t(is_size.size()) * std::int64_t(os_size.size());
    }
};

// Keeps only power-of-two scr/is_size/os_size candidates; eliminates the
// whole space when the bus is wider than either per-macro port (icw or wuw).
// Throws EmptySpaceError naming the violated rule when nothing survives.
SearchSpace prune_space(const SearchSpace& raw, std::int64_t bw, const MacroSpec& macro);

AcceleratorConfig space_config(const SearchSpace& space, std::int64_t mr, std::int64_t mc,
                               std::int64_t scr, std::int64_t is_bits, std::int64_t os_bits);

// One workload operator entry resolved to its objective-best strategy.
struct OpChoice {
    std::string op_id;
    MappingStrategy strategy;
    std::int64_t multiplicity = 1;
    SimReport report;  // single-instance report for the chosen strategy
};

struct EvalResult {
    double objective_scalar = 0.0;  // minimized: pJ/OP or us/OP
    double objective_value = 0.0;   // reported: pJ/OP or GOPS
    double total_ops = 0.0;         // 1 MAC = 2 OPs, multiplicity-weighted
    double area_mm2 = 0.0;
    SimReport aggregate;  // multiplicity-weighted workload totals
    std::vector<OpChoice> per_op;
    std::int64_t per_op_evaluations = 0;  // (op entry, strategy) simulations requested
};

// Plans, compiles, and simulates every strategy in `menu` for every operator
// entry, picks the objective-minimal strategy per entry (first wins ties),
// and aggregates with multiplicity weighting. Identical-signature entries are
// bucketed so merged and unrolled workloads aggregate to bit-identical
// totals. Throws InfeasiblePlanError when some operator fits no strategy.
EvalResult evaluate_with(const AcceleratorConfig& cfg, const Workload& w,
                         const CostCoefficients& coeffs, Objective objective,
                         const std::vector<MappingStrategy>& menu);

// evaluate_with over all 8 strategies.
EvalResult evaluate(const AcceleratorConfig& cfg, const Workload& w,
                    const CostCoefficients& coeffs, Objective objective);

struct HistoryEntry {
    std::int64_t iteration = 0;
    AcceleratorConfig candidate;
    double objective_scalar = 0.0;
    double objective_value = 0.0;
    bool accepted = false;
};

struct ExploreResult {
    AcceleratorConfig best_config;
    std::vector<OpChoice> per_op;
    Objective objective = Objective::energy_eff;
    double objective_scalar = 0.0;
    double objective_value = 0.0;
    double energy_pj = 0.0;
    double gops = 0.0;
    double area_mm2 = 0.0;
    double area_budget_mm2 = 0.0;
    std::uint64_t seed = 0;
    AnnealSchedule schedule;
    PruneStats prune;
    std::int64_t evaluations = 0;  // distinct candidate evaluations performed
    std::vector<HistoryEntry> history;
};

// Seeded simulated annealing over the pruned space. Each move perturbs one
// parameter one candidate step (mr/mc one integer, scr/is/os one power of
// two), clamped to the space; over-budget candidates are rejected before
// evaluation and plan-infeasible ones after, neither entering the history.
// Throws InfeasibleBudgetError when not even the smallest candidate fits.
ExploreResult anneal(const SearchSpace& space, const Workload& w,
                     const CostCoefficients& coeffs, Objective objective,
                     double area_budget_mm2, std::uint64_t seed,
                     const AnnealSchedule& schedule = AnnealSchedule{});

// Full enumeration of the space under the budget; the annealer's oracle.
ExploreResult exhaustive_best(const SearchSpace& space, const Workload& w,
                              const CostCoefficients& coeffs, Objective objective,
                              double area_budget_mm2);

}  // namespace cimflow
