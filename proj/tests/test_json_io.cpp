#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "cimflow/json_io.hpp"

using namespace cimflow;

namespace {

const char* kMacroDirs[] = {"data/macros/vanilla_dcim.json", "data/macros/trancim_like.json",
                            "data/macros/tpdcim_like.json", "data/macros/analog_sram.json"};

MacroSpec vanilla() { return load_macro("data/macros/vanilla_dcim.json"); }

}  // namespace

TEST_CASE("every shipped data file loads and validates") {
    for (const char* p : kMacroDirs) {
        MacroSpec m = load_macro(p);
        validate_macro(m);
        CHECK(!m.name.empty());
    }
    MacroSpec van = vanilla();
    for (const char* p :
         {"data/configs/trancim_base.json", "data/configs/tpdcim_base.json",
          "data/configs/attn_tradeoff.json", "data/configs/sweep_base.json",
          "data/configs/toy.json"}) {
        AcceleratorConfig cfg = load_config(p, van);
        validate_config(cfg);
    }
    for (const char* p :
         {"data/coeffs/generic.json", "data/coeffs/trancim_cal.json",
          "data/coeffs/tpdcim_cal.json", "data/coeffs/sweep_cal.json"}) {
        CostCoefficients c = load_coeffs(p);
        CHECK(c.e_ema > 0.0);
    }
    for (const char* p :
         {"data/workloads/bert_large.json", "data/workloads/resnet50.json",
          "data/workloads/square_net.json", "data/workloads/toy.json",
          "data/workloads/gemm4096.json", "data/workloads/block24.json"}) {
        Workload w = load_workload(p);
        CHECK(!w.ops.empty());
        CHECK(w.total_macs() > 0);
    }
    for (const char* p : {"data/spaces/trancim_explore.json",
                          "data/spaces/tpdcim_explore.json",
                          "data/spaces/small_space.json"}) {
        ExploreSpec spec = load_space(p);
        CHECK(spec.space.points() > 0);
        CHECK(spec.budget_mm2.has_value());
    }
    SweepSpec sweep = load_sweep("data/sweeps/split_4096.json");
    CHECK(sweep.points.size() == 6);
}

TEST_CASE("sizes parse as bits or KB strings") {
    MacroSpec van = vanilla();
    AcceleratorConfig a = parse_config_json(R"({
        "name": "x", "mr": 1, "mc": 1, "bw": 128,
        "is_size": "8KB", "os_size": 8192
    })", van);
    CHECK(a.is_size == 8 * 8192);
    CHECK(a.os_size == 8192);
    CHECK(a.macro.scr == van.scr);

    AcceleratorConfig b = parse_config_json(R"({
        "name": "x", "mr": 2, "mc": 3, "scr": 4, "bw": 64,
        "is_size": "1KB", "os_size": "2KB"
    })", van);
    CHECK(b.macro.scr == 4);
    CHECK(b.mr == 2);
    CHECK(b.mc == 3);
}

TEST_CASE("unknown fields are rejected in every format") {
    MacroSpec van = vanilla();
    CHECK_THROWS_AS(parse_config_json(R"({
        "name": "x", "mr": 1, "mc": 1, "bw": 128,
        "is_size": 8192, "os_size": 8192, "voltage": 0.8
    })", van), ParseError);
    CHECK_THROWS_AS(parse_macro_json(R"({
        "name": "m", "kind": "digital", "al": 64, "pc": 8, "scr": 1,
        "wuw": 128, "n_input_bitline": 8, "simultaneous_compute_update": false,
        "freq_mhz": 1000, "e_mac_pj": 0.04, "a_compute_mm2": 0.03,
        "a_bank_mm2": 0.01, "rows": 64
    })"), ParseError);
    CHECK_THROWS_AS(parse_coeffs_json(R"({"name": "c", "e_is_rd": 1.0, "bogus": 2})"),
                    ParseError);
    CHECK_THROWS_AS(parse_space_json(R"({"name": "s", "surprise": 1})"), ParseError);
    CHECK_THROWS_AS(parse_sweep_json(R"({"name": "s", "points": [],
        "unexpected": true})"), ParseError);
}

TEST_CASE("macro icw defaults from al when omitted") {
    MacroSpec m = parse_macro_json(R"({
        "name": "m", "kind": "digital", "al": 32, "pc": 4, "scr": 2,
        "wuw": 64, "n_input_bitline": 4, "simultaneous_compute_update": false,
        "freq_mhz": 500, "e_mac_pj": 0.05, "a_compute_mm2": 0.02,
        "a_bank_mm2": 0.01
    })");
    CHECK(m.icw == 32 * 4);
    CHECK(m.kind == MacroKind::digital);
    CHECK(m.freq_mhz == 500.0);
}

TEST_CASE("calibrated areas land on their published footprints") {
    MacroSpec tran = load_macro("data/macros/trancim_like.json");
    AcceleratorConfig tran_cfg = load_config("data/configs/trancim_base.json", tran);
    CostCoefficients tran_cal = load_coeffs("data/coeffs/trancim_cal.json");
    CHECK(std::abs(area_of(tran_cfg, tran_cal) - 3.52) < 1e-9);

    MacroSpec tp = load_macro("data/macros/tpdcim_like.json");
    AcceleratorConfig tp_cfg = load_config("data/configs/tpdcim_base.json", tp);
    CostCoefficients tp_cal = load_coeffs("data/coeffs/tpdcim_cal.json");
    CHECK(std::abs(area_of(tp_cfg, tp_cal) - 2.23) < 1e-9);
}

TEST_CASE("sweep points patch the base config at equal area") {
    MacroSpec van = vanilla();
    AcceleratorConfig base = load_config("data/configs/sweep_base.json", van);
    CostCoefficients cal = load_coeffs("data/coeffs/sweep_cal.json");
    SweepSpec sweep = load_sweep("data/sweeps/split_4096.json");

    double first = -1.0;
    for (const SweepPoint& pt : sweep.points) {
        AcceleratorConfig cfg = apply_patch(base, pt);
        validate_config(cfg);
        CHECK(cfg.name == base.name + "@" + pt.label);
        double area = area_of(cfg, cal);
        if (first < 0)
            first = area;
        else
            CHECK(area == doctest::Approx(first).epsilon(1e-12));
    }
    CHECK(first == doctest::Approx(4.296).epsilon(1e-9));
}

TEST_CASE("space files carry schedule and start defaults") {
    ExploreSpec spec = load_space("data/spaces/trancim_explore.json");
    CHECK(spec.space.bw == 128);
    REQUIRE(spec.space.start.has_value());
    CHECK(spec.space.start->mr == 3);
    CHECK(spec.space.start->mc == 1);
    CHECK(spec.objective.has_value());
    CHECK(spec.seed.has_value());
    CHECK(spec.schedule.max_evals == 400);
    CHECK(spec.schedule.alpha == doctest::Approx(0.85));

    ExploreSpec bare = load_space("data/spaces/small_space.json");
    CHECK(!bare.space.start.has_value());
}

TEST_CASE("result and manifest JSON round-trip through a parser") {
    MacroSpec van = vanilla();
    AcceleratorConfig cfg = load_config("data/configs/toy.json", van);
    Workload w = load_workload("data/workloads/toy.json");
    CostCoefficients c = load_coeffs("data/coeffs/generic.json");

    EvalResult ev = evaluate(cfg, w, c, Objective::energy_eff);
    nlohmann::json j = nlohmann::json::parse(eval_result_json(cfg, Objective::energy_eff, ev));
    CHECK(j.contains("objective"));
    CHECK(j.contains("objective_scalar"));
    CHECK(j.contains("aggregate"));
    CHECK(j.contains("per_op"));
    CHECK(j["objective"] == "energy_eff");

    SearchSpace pruned = prune_space(load_space("data/spaces/small_space.json").space,
                                     128, van);
    ExploreResult res = anneal(pruned, w, c, Objective::energy_eff, 0.45, 3);
    nlohmann::json rj = nlohmann::json::parse(explore_result_json(res));
    for (const char* key :
         {"area_budget_mm2", "area_mm2", "best_config", "energy_pj", "evaluations",
          "gops", "history_entries", "objective", "objective_scalar",
          "objective_value", "per_op_strategy", "prune", "schedule", "seed"}) {
        CAPTURE(key);
        CHECK(rj.contains(key));
    }
    CHECK(rj["history_entries"].get<std::int64_t>() ==
          static_cast<std::int64_t>(res.history.size()));
    CHECK(rj["best_config"].contains("mr"));
    CHECK(rj["best_config"].contains("macro"));

    std::string csv = history_csv(res);
    CHECK(csv.rfind("iteration,", 0) == 0);

    nlohmann::json mj = nlohmann::json::parse(manifest_json(
        "simulate", {"a.json", "b.json"}, 42, {{"objective", "energy_eff"}}));
    CHECK(mj.contains("command"));
    CHECK(mj.contains("inputs"));
    CHECK(mj.contains("seed"));
    CHECK(mj.contains("resolved"));
    CHECK(mj.contains("tool_version"));
    CHECK(mj.contains("timestamp"));
    CHECK(mj["seed"] == 42);
}
