#pragma once

#include <cstdint>
#include <string>

#include "cimflow/common.hpp"

namespace cimflow {

enum class MacroKind { digital, analog };

// How macro storage planes extend the resident tile:
//   af: planes stack along K, partial sums accumulate in place across planes.
//   pf: planes stack along N, one input vector fans out across planes.
enum class Tiling { af, pf };

// CIM macro described by its matrix footprint: AL rows of accumulation depth,
// PC parallel output channels, SCR storage planes behind each compute plane.
// icw/wuw are the port widths that normalize digital and analog timing.
struct MacroSpec {
    std::string name;
    MacroKind kind = MacroKind::digital;
    std::int64_t al = 0;
    std::int64_t pc = 0;
    std::int64_t scr = 1;
    std::int64_t icw = 0;              // input bits absorbed per full-precision pass
    std::int64_t wuw = 0;              // weight-update bits per cycle
    std::int64_t n_input_bitline = 0;  // digital: input bits consumed per cycle per row
    std::int64_t dac_precision = 0;    // analog: input bits converted per cycle per row
    bool simultaneous_compute_update = false;  // may write one plane while computing another
    double freq_mhz = 1000.0;
    double e_mac_pj = 0.0;
    double a_compute_mm2 = 0.0;  // compute-plane logic per macro
    double a_bank_mm2 = 0.0;     // per storage plane per macro
};

// al * n_input_bitline (digital) or al * dac_precision (analog).
std::int64_t derive_icw(const MacroSpec& macro);

// Cycles for one activation pass at dw_in input bits.
std::int64_t compute_cycles(const MacroSpec& macro, int dw_in);

// Cycles to refill one AL-deep column of one plane at dw_w weight bits.
std::int64_t update_cycles(const MacroSpec& macro, int dw_w);

// Template instance: macro grid of mr rows by mc columns, shared external bus
// of bw bits per cycle, input/output SRAMs. Grid columns extend the
// accumulation (K) dimension, grid rows extend the output (N) dimension.
struct AcceleratorConfig {
    MacroSpec macro;
    std::string name;
    std::int64_t mr = 1;
    std::int64_t mc = 1;
    std::int64_t bw = 0;       // external bus, bits per cycle
    std::int64_t is_size = 0;  // input SRAM, bits
    std::int64_t os_size = 0;  // output SRAM, bits
};

struct ResidentShape {
    std::int64_t k_res = 0;
    std::int64_t n_res = 0;
};

// K x N region the array holds at once under the given plane tiling:
// af -> (scr*mc*al, mr*pc), pf -> (mc*al, scr*mr*pc).
ResidentShape resident_shape(const AcceleratorConfig& cfg, Tiling tiling);

// SRAM/bus energy and area calibration. Energies in pJ/bit, areas in mm2.
struct CostCoefficients {
    std::string name;
    double e_is_rd = 0.0;
    double e_is_wr = 0.0;
    double e_os_rd = 0.0;
    double e_os_wr = 0.0;
    double e_ema = 0.0;         // per bit crossing the external bus
    double e_cim_update = 0.0;  // per weight bit written into the array
    double a_is = 0.0;          // mm2 per KB of input SRAM
    double a_os = 0.0;          // mm2 per KB of output SRAM
    double a_fixed = 0.0;       // controller, NoC, pads
};

// mr*mc*(a_compute + scr*a_bank) + a_is*KB(is) + a_os*KB(os) + a_fixed.
double area_of(const AcceleratorConfig& cfg, const CostCoefficients& c);

// MACs the array can retire per cycle at the given input precision.
double peak_macs_per_cycle(const AcceleratorConfig& cfg, int dw_in);

// Mapping-independent cycle lower bounds for an m x k x n multiply on cfg.
std::int64_t compute_cycle_floor(const AcceleratorConfig& cfg, std::int64_t m,
                                 std::int64_t k, std::int64_t n, int dw_in);
std::int64_t bandwidth_cycle_floor(const AcceleratorConfig& cfg, std::int64_t m,
                                   std::int64_t k, std::int64_t n, int dw_in,
                                   int dw_w, int dw_out);

// Throws ValidationError on non-positive parameters or an icw that
// contradicts al and the per-cycle input width.
void validate_macro(const MacroSpec& macro);
void validate_config(const AcceleratorConfig& cfg);

// Stable hash over every architectural parameter; names excluded.
std::uint64_t fingerprint(const AcceleratorConfig& cfg);

}  // namespace cimflow
