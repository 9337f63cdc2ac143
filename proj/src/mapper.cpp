#include "cimflow/mapper.hpp"

#include <algorithm>

#include <json.hpp>

namespace cimflow {

std::array<MappingStrategy, 8> enumerate_strategies() {
    std::array<MappingStrategy, 8> out{};
    std::size_t i = 0;
    for (Spatial sp : {Spatial::nr, Spatial::r})
        for (Temporal tp : {Temporal::ip, Temporal::wp})
            for (Tiling ti : {Tiling::af, Tiling::pf}) out[i++] = {sp, tp, ti};
    return out;
}

std::array<MappingStrategy, 2> spatial_only_strategies() {
    return {MappingStrategy{Spatial::nr, Temporal::ip, Tiling::af},
            MappingStrategy{Spatial::r, Temporal::ip, Tiling::af}};
}

std::string strategy_name(const MappingStrategy& s) {
    std::string out = s.spatial == Spatial::nr ? "NR" : "R";
    out += s.temporal == Temporal::ip ? "-IP" : "-WP";
    out += s.tiling == Tiling::af ? "-AF" : "-PF";
    return out;
}

MappingStrategy parse_strategy(const std::string& name) {
    for (const auto& s : enumerate_strategies())
        if (strategy_name(s) == name) return s;
    throw ParseError("unknown strategy '" + name + "' (expected e.g. NR-IP-AF)");
}

GemmOp canonicalize_spatial(const GemmOp& op, Spatial spatial) {
    if (spatial == Spatial::nr) return op;
    GemmOp swapped = op;
    std::swap(swapped.m, swapped.n);
    std::swap(swapped.dw_in, swapped.dw_w);
    return swapped;
}

TilingPlan plan_tiling(const GemmOp& raw_op, const AcceleratorConfig& cfg,
                       const MappingStrategy& s) {
    TilingPlan plan;
    plan.op = canonicalize_spatial(raw_op, s.spatial);
    plan.strategy = s;

    const GemmOp& op = plan.op;
    ResidentShape res = resident_shape(cfg, s.tiling);
    plan.k_res = res.k_res;
    plan.n_res = res.n_res;
    plan.k_window = std::min(op.k, res.k_res);
    plan.n_window = std::min(op.n, res.n_res);

    // One plane covers mc*al of K (af) or mr*pc of N (pf).
    std::int64_t plane_k = cfg.mc * cfg.macro.al;
    std::int64_t plane_n = cfg.mr * cfg.macro.pc;
    plan.planes = s.tiling == Tiling::af
                      ? ceil_div_i(plan.k_window, plane_k)
                      : ceil_div_i(plan.n_window, plane_n);

    // Minimal working set: one per-plane input strip for a single row, and
    // one per-plane psum row. Below that no schedule exists.
    std::int64_t min_is = std::min(op.k, plane_k) * op.dw_in;
    std::int64_t min_os = std::min(op.n, plane_n) * op.dw_psum;
    if (cfg.is_size < min_is)
        throw InfeasiblePlanError("is_size " + std::to_string(cfg.is_size) +
                                  " bits cannot hold one input strip of " +
                                  std::to_string(min_is) + " bits");
    if (cfg.os_size < min_os)
        throw InfeasiblePlanError("os_size " + std::to_string(cfg.os_size) +
                                  " bits cannot hold one psum row of " +
                                  std::to_string(min_os) + " bits");

    std::int64_t row_bits = plan.k_window * op.dw_in;
    if (cfg.is_size >= row_bits) {
        plan.m_tile = std::min(op.m, cfg.is_size / row_bits);
        plan.strip_streaming = false;
    } else {
        plan.m_tile = 1;
        plan.strip_streaming = true;
    }
    plan.footprint_is_bits = plan.strip_streaming ? min_is : plan.m_tile * row_bits;

    plan.k_outer = ceil_div_i(op.k, plan.k_res);
    plan.n_outer = ceil_div_i(op.n, plan.n_res);
    plan.m_outer = ceil_div_i(op.m, plan.m_tile);

    if (s.temporal == Temporal::ip) {
        plan.loop_order = {"n_outer", "k_outer", "m_outer"};
        std::int64_t rows = plan.k_outer > 1 ? op.m : plan.m_tile;
        plan.footprint_os_bits = rows * plan.n_res * op.dw_psum;
    } else {
        plan.loop_order = {"m_outer", "n_outer", "k_outer"};
        plan.footprint_os_bits = plan.m_tile * plan.n_res * op.dw_psum;
    }
    plan.psum_spill = plan.footprint_os_bits > cfg.os_size;
    return plan;
}

std::string plan_to_json(const TilingPlan& plan) {
    nlohmann::json j;
    j["op"] = {{"id", plan.op.id},       {"m", plan.op.m},
               {"k", plan.op.k},         {"n", plan.op.n},
               {"dw_in", plan.op.dw_in}, {"dw_w", plan.op.dw_w},
               {"dw_out", plan.op.dw_out}, {"dw_psum", plan.op.dw_psum}};
    j["strategy"] = strategy_name(plan.strategy);
    j["k_res"] = plan.k_res;
    j["n_res"] = plan.n_res;
    j["k_window"] = plan.k_window;
    j["n_window"] = plan.n_window;
    j["planes"] = plan.planes;
    j["m_tile"] = plan.m_tile;
    j["n_outer"] = plan.n_outer;
    j["k_outer"] = plan.k_outer;
    j["m_outer"] = plan.m_outer;
    j["loop_order"] = plan.loop_order;
    j["strip_streaming"] = plan.strip_streaming;
    j["footprint_is_bits"] = plan.footprint_is_bits;
    j["footprint_os_bits"] = plan.footprint_os_bits;
    j["psum_spill"] = plan.psum_spill;
    return j.dump(2);
}

}  // namespace cimflow
