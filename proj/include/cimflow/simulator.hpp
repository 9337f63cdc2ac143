#pragma once

#include <map>
#include <string>
#include <vector>

#include "cimflow/compiler.hpp"

namespace cimflow {

struct TrafficBits {
    std::int64_t ext_rd = 0, ext_wr = 0;
    std::int64_t is_rd = 0, is_wr = 0;
    std::int64_t os_rd = 0, os_wr = 0;
    std::int64_t cim_wr = 0;
};

struct SimReport {
    std::int64_t cycles = 0;
    double wall_time_us = 0.0;
    double energy_pj = 0.0;  // always the sum of energy_breakdown
    std::map<std::string, double> energy_breakdown;
    double ema_psum_pj = 0.0;  // psum round-trip share of the ema bucket
    TrafficBits traffic_bits;
    std::int64_t macs = 0;
    double cim_utilization = 0.0;
    std::map<std::string, std::int64_t> stall_cycles;  // bandwidth_bound, hazard_bound
    std::int64_t xfer_busy_cycles = 0;
    std::int64_t compute_busy_cycles = 0;
    std::map<std::string, std::int64_t> instr_counts;
    bool psum_spill = false;
};

// Cycle count and instruction-level energy for a lowered flow. The two
// engines retire their segment instructions in issue order and join at each
// barrier; accumulate cycles hide under later array passes within a segment.
// Throws ValidationError when the flow was lowered for a different config.
SimReport simulate(const InstructionFlow& flow, const AcceleratorConfig& cfg,
                   const CostCoefficients& coeffs);

struct Matrix {
    std::int64_t rows = 0, cols = 0;
    std::vector<std::int64_t> v;

    static Matrix zeros(std::int64_t r, std::int64_t c) {
        return {r, c, std::vector<std::int64_t>(static_cast<std::size_t>(r * c), 0)};
    }
    std::int64_t& at(std::int64_t i, std::int64_t j) {
        return v[static_cast<std::size_t>(i * cols + j)];
    }
    std::int64_t at(std::int64_t i, std::int64_t j) const {
        return v[static_cast<std::size_t>(i * cols + j)];
    }
};

// Bit-exact replay of a flow against an external memory image. Values move
// only through instruction addresses, so a mislowered flow diverges
// numerically instead of passing by accident. inputs is orig_m x k and
// weights is k x orig_n; the result is orig_m x orig_n regardless of the
// spatial strategy. Throws ValidationError on shape mismatch, out-of-bounds
// external access, or a read of a never-written SRAM or psum location.
Matrix functional_execute(const InstructionFlow& flow, const Matrix& inputs,
                          const Matrix& weights);

}  // namespace cimflow
