#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cimflow/explorer.hpp"

using namespace cimflow;

namespace {

MacroSpec proto_macro() {
    MacroSpec m;
    m.name = "proto";
    m.kind = MacroKind::digital;
    m.al = 64;
    m.pc = 8;
    m.scr = 2;
    m.icw = 512;
    m.wuw = 128;
    m.n_input_bitline = 8;
    m.freq_mhz = 1000.0;
    m.e_mac_pj = 0.04;
    m.a_compute_mm2 = 0.032;
    m.a_bank_mm2 = 0.012;
    return m;
}

CostCoefficients coeffs_generic() {
    CostCoefficients c;
    c.e_is_rd = 0.012;
    c.e_is_wr = 0.014;
    c.e_os_rd = 0.016;
    c.e_os_wr = 0.018;
    c.e_ema = 0.60;
    c.e_cim_update = 0.020;
    c.a_is = 0.004;
    c.a_os = 0.006;
    c.a_fixed = 0.1;
    return c;
}

Workload toy_workload() {
    Workload w;
    w.name = "toy";
    GemmOp a;
    a.id = "t64";
    a.m = a.k = a.n = 64;
    a.dw_in = a.dw_w = a.dw_out = 8;
    a.dw_psum = 22;
    GemmOp b;
    b.id = "t_wide";
    b.m = 48;
    b.k = 32;
    b.n = 80;
    b.dw_in = 4;
    b.dw_w = 4;
    b.dw_out = 16;
    b.dw_psum = 16;
    b.multiplicity = 2;
    w.ops = {a, b};
    return w;
}

SearchSpace small_space() {
    SearchSpace s;
    s.macro = proto_macro();
    s.bw = 128;
    s.mr = {1, 2};
    s.mc = {1, 2};
    s.scr = {2, 4};
    s.is_size = {8192 * 8, 8192 * 16, 8192 * 32};
    s.os_size = {8192 * 4, 8192 * 8};
    return s;
}

bool pow2_ok(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

TEST_CASE("pruning keeps powers of two") {
    SearchSpace raw;
    raw.macro = proto_macro();
    raw.bw = 128;
    raw.mr = {1, 2, 3};
    raw.mc = {1, 2};
    raw.scr = {1, 2, 3, 4, 6, 8, 12, 16};
    raw.is_size = {50000, 65536, 100000, 131072};
    raw.os_size = {3000, 32768, 65536};
    SearchSpace kept = prune_space(raw, raw.bw, raw.macro);

    CHECK(kept.mr == std::vector<std::int64_t>{1, 2, 3});
    CHECK(kept.mc == std::vector<std::int64_t>{1, 2});
    CHECK(kept.scr == std::vector<std::int64_t>{1, 2, 4, 8, 16});
    CHECK(kept.is_size == std::vector<std::int64_t>{65536, 131072});
    CHECK(kept.os_size == std::vector<std::int64_t>{32768, 65536});
    CHECK(kept.stats.raw_points == raw.points());
    CHECK(kept.stats.kept_points == kept.points());
    CHECK(kept.stats.pruned_fraction() ==
          doctest::Approx(1.0 - 120.0 / 576.0).epsilon(1e-12));
}

TEST_CASE("a bus wider than a macro port empties the space") {
    SearchSpace raw = small_space();
    raw.macro.icw = 64;  // analog-style narrow input port
    raw.macro.al = 64;
    raw.macro.n_input_bitline = 1;
    CHECK_THROWS_WITH_AS(prune_space(raw, 128, raw.macro),
                         doctest::Contains("icw"), EmptySpaceError);

    SearchSpace raw2 = small_space();
    raw2.macro.wuw = 64;
    CHECK_THROWS_WITH_AS(prune_space(raw2, 128, raw2.macro),
                         doctest::Contains("wuw"), EmptySpaceError);
}

TEST_CASE("evaluate picks the menu-best strategy per operator") {
    AcceleratorConfig cfg = space_config(small_space(), 2, 1, 2, 8192 * 16, 8192 * 4);
    Workload w = toy_workload();
    CostCoefficients c = coeffs_generic();

    EvalResult full = evaluate(cfg, w, c, Objective::energy_eff);
    CHECK(full.per_op.size() == 2);
    CHECK(full.per_op_evaluations == 16);

    // Manual argmin over single-strategy menus must agree.
    for (std::size_t oi = 0; oi < w.ops.size(); ++oi) {
        double best = 1e300;
        for (const auto& s : enumerate_strategies()) {
            Workload solo;
            solo.name = "solo";
            solo.ops = {w.ops[oi]};
            EvalResult one = evaluate_with(cfg, solo, c, Objective::energy_eff, {s});
            best = std::min(best, one.objective_scalar);
        }
        Workload solo;
        solo.name = "solo";
        solo.ops = {w.ops[oi]};
        EvalResult chosen = evaluate_with(cfg, solo, c, Objective::energy_eff,
                                          {full.per_op[oi].strategy});
        CHECK(chosen.objective_scalar == doctest::Approx(best).epsilon(1e-12));
    }

    // Full menu can never lose to the spatial-only baseline.
    auto base_menu = spatial_only_strategies();
    EvalResult base = evaluate_with(cfg, w, c, Objective::energy_eff,
                                    {base_menu.begin(), base_menu.end()});
    CHECK(full.objective_scalar <= base.objective_scalar);
}

TEST_CASE("objective scalars line up with aggregate totals") {
    AcceleratorConfig cfg = space_config(small_space(), 1, 2, 4, 8192 * 32, 8192 * 8);
    Workload w = toy_workload();
    CostCoefficients c = coeffs_generic();

    EvalResult e = evaluate(cfg, w, c, Objective::energy_eff);
    double ops = 2.0 * (64.0 * 64 * 64 + 2 * 48.0 * 32 * 80);
    CHECK(e.total_ops == doctest::Approx(ops).epsilon(1e-12));
    CHECK(e.objective_scalar == doctest::Approx(e.aggregate.energy_pj / ops).epsilon(1e-12));
    CHECK(e.objective_value == doctest::Approx(e.objective_scalar).epsilon(1e-12));

    EvalResult t = evaluate(cfg, w, c, Objective::throughput);
    CHECK(t.objective_scalar ==
          doctest::Approx(t.aggregate.wall_time_us / ops).epsilon(1e-12));
    // GOPS = ops / (us * 1000)
    CHECK(t.objective_value ==
          doctest::Approx(ops / t.aggregate.wall_time_us / 1000.0).epsilon(1e-12));
}

TEST_CASE("merged and unrolled workloads aggregate identically") {
    AcceleratorConfig cfg = space_config(small_space(), 2, 2, 2, 8192 * 16, 8192 * 8);
    CostCoefficients c = coeffs_generic();

    Workload merged = toy_workload();
    Workload unrolled;
    unrolled.name = "unrolled";
    for (int rep = 0; rep < 3; ++rep) {
        for (GemmOp op : merged.ops) {
            op.id += "#" + std::to_string(rep);
            unrolled.ops.push_back(op);
        }
    }
    for (GemmOp& op : merged.ops) op.multiplicity *= 3;

    EvalResult em = evaluate(cfg, merged, c, Objective::energy_eff);
    EvalResult eu = evaluate(cfg, unrolled, c, Objective::energy_eff);
    CHECK(em.aggregate.cycles == eu.aggregate.cycles);
    CHECK(em.aggregate.energy_pj == eu.aggregate.energy_pj);
    CHECK(em.aggregate.macs == eu.aggregate.macs);
    CHECK(em.aggregate.traffic_bits.ext_rd == eu.aggregate.traffic_bits.ext_rd);
    CHECK(em.aggregate.traffic_bits.os_wr == eu.aggregate.traffic_bits.os_wr);
    CHECK(em.objective_scalar == eu.objective_scalar);
    CHECK(em.per_op.size() == 2);
    CHECK(eu.per_op.size() == 6);
    CHECK(em.per_op_evaluations == 16);
    CHECK(eu.per_op_evaluations == 48);
}

TEST_CASE("anneal is deterministic per seed and never beats exhaustive") {
    SearchSpace pruned = prune_space(small_space(), 128, proto_macro());
    Workload w = toy_workload();
    CostCoefficients c = coeffs_generic();
    double budget = 0.45;

    ExploreResult ex = exhaustive_best(pruned, w, c, Objective::energy_eff, budget);
    CHECK(ex.area_mm2 <= budget);
    CHECK(ex.evaluations > 0);

    AnnealSchedule sched;
    sched.t0_frac = 0.5;
    sched.alpha = 0.85;
    sched.moves_per_temp = 25;
    sched.max_evals = 200;
    sched.patience = 8;

    ExploreResult a1 = anneal(pruned, w, c, Objective::energy_eff, budget, 7, sched);
    ExploreResult a2 = anneal(pruned, w, c, Objective::energy_eff, budget, 7, sched);
    CHECK(a1.objective_scalar == a2.objective_scalar);
    CHECK(fingerprint(a1.best_config) == fingerprint(a2.best_config));
    CHECK(a1.history.size() == a2.history.size());
    CHECK(a1.objective_scalar >= ex.objective_scalar);
    CHECK(a1.area_mm2 <= budget);

    ExploreResult a3 = anneal(pruned, w, c, Objective::energy_eff, budget, 8, sched);
    CHECK(a3.objective_scalar >= ex.objective_scalar);
}

TEST_CASE("anneal history stays inside the pruned space and budget") {
    SearchSpace pruned = prune_space(small_space(), 128, proto_macro());
    Workload w = toy_workload();
    CostCoefficients c = coeffs_generic();
    double budget = 0.45;

    ExploreResult res = anneal(pruned, w, c, Objective::energy_eff, budget, 5);
    REQUIRE(!res.history.empty());
    CHECK(res.history.front().iteration == 0);
    CHECK(res.history.front().accepted);
    auto contains = [](const std::vector<std::int64_t>& v, std::int64_t x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    bool any_accept = false;
    for (const HistoryEntry& h : res.history) {
        const AcceleratorConfig& cand = h.candidate;
        CHECK(contains(pruned.mr, cand.mr));
        CHECK(contains(pruned.mc, cand.mc));
        CHECK(contains(pruned.scr, cand.macro.scr));
        CHECK(contains(pruned.is_size, cand.is_size));
        CHECK(contains(pruned.os_size, cand.os_size));
        CHECK(pow2_ok(cand.macro.scr));
        CHECK(area_of(cand, c) <= budget + 1e-12);
        any_accept = any_accept || h.accepted;
    }
    CHECK(any_accept);
    CHECK(res.evaluations <= 200 + 1);
    CHECK(res.area_budget_mm2 == budget);
    CHECK(res.seed == 5);
}

TEST_CASE("an impossible budget throws") {
    SearchSpace pruned = prune_space(small_space(), 128, proto_macro());
    Workload w = toy_workload();
    CHECK_THROWS_AS(
        anneal(pruned, w, coeffs_generic(), Objective::energy_eff, 0.05, 1),
        InfeasibleBudgetError);
    CHECK_THROWS_AS(
        exhaustive_best(pruned, w, coeffs_generic(), Objective::energy_eff, 0.05),
        InfeasibleBudgetError);
}

TEST_CASE("objective names round-trip") {
    CHECK(parse_objective("energy_eff") == Objective::energy_eff);
    CHECK(parse_objective("throughput") == Objective::throughput);
    CHECK(std::string(objective_name(Objective::energy_eff)) == "energy_eff");
    CHECK(std::string(objective_name(Objective::throughput)) == "throughput");
    CHECK_THROWS_AS(parse_objective("latency"), ParseError);
}
