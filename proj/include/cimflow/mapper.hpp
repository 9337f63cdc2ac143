#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cimflow/hwmodel.hpp"
#include "cimflow/workload.hpp"

namespace cimflow {

enum class Spatial { nr, r };    // weights resident (nr) or activations resident (r)
enum class Temporal { ip, wp };  // inner loop refreshes input SRAM (ip) or CIM weights (wp)

struct MappingStrategy {
    Spatial spatial = Spatial::nr;
    Temporal temporal = Temporal::ip;
    Tiling tiling = Tiling::af;

    bool operator==(const MappingStrategy& o) const {
        return spatial == o.spatial && temporal == o.temporal && tiling == o.tiling;
    }
};

// All 8 strategies: NR before R, IP before WP, AF before PF.
std::array<MappingStrategy, 8> enumerate_strategies();

// The 2-strategy spatial-only subset {(NR,IP,AF), (R,IP,AF)}.
std::array<MappingStrategy, 2> spatial_only_strategies();

std::string strategy_name(const MappingStrategy& s);      // e.g. "NR-IP-AF"
MappingStrategy parse_strategy(const std::string& name);  // throws ParseError

// NR returns op unchanged. R swaps m<->n and dw_in<->dw_w so the array holds
// the transposed activation and weight columns stream; downstream machinery
// is spatial-agnostic after this swap. Involution: applying R twice is identity.
GemmOp canonicalize_spatial(const GemmOp& op, Spatial spatial);

// Concrete elaboration of one (op, config, strategy) triple. `op` is stored
// post-canonicalization; all dimensions below refer to the canonical problem.
struct TilingPlan {
    GemmOp op;
    MappingStrategy strategy;
    std::int64_t k_res = 0;   // array-resident K extent
    std::int64_t n_res = 0;   // array-resident N extent
    std::int64_t m_tile = 0;  // input rows resident in IS per tile
    std::int64_t n_outer = 0;
    std::int64_t k_outer = 0;
    std::int64_t m_outer = 0;
    std::vector<std::string> loop_order;  // outermost first
    bool strip_streaming = false;  // IS cannot hold one full K-window row;
                                   // loads fall back to per-plane strips
    std::int64_t footprint_is_bits = 0;
    std::int64_t footprint_os_bits = 0;
    bool psum_spill = false;  // footprint_os_bits > os_size

    // Derived window geometry used by the compiler.
    std::int64_t k_window = 0;  // min(k, k_res)
    std::int64_t n_window = 0;  // min(n, n_res)
    std::int64_t planes = 0;    // storage planes active for the window
};

// Elaborates tile sizes, trip counts, loop order, and psum residency.
// Throws InfeasiblePlanError when the SRAMs cannot hold even the minimal
// working set (one per-plane input strip for one row; one per-plane psum row).
TilingPlan plan_tiling(const GemmOp& op, const AcceleratorConfig& cfg,
                       const MappingStrategy& s);

// JSON rendering for --dump-plan.
std::string plan_to_json(const TilingPlan& plan);

}  // namespace cimflow
