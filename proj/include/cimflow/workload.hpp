#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cimflow/common.hpp"

namespace cimflow {

// One canonical matrix-multiply operator: out[M x N] = in[M x K] * w[K x N].
// Convolutions are lowered to this form at parse time (im2col).
struct GemmOp {
    std::string id;
    std::int64_t m = 0;  // output rows
    std::int64_t k = 0;  // accumulation depth
    std::int64_t n = 0;  // output columns
    int dw_in = 8;       // bits per input element
    int dw_w = 8;        // bits per weight element
    int dw_out = 8;      // bits per output element
    int dw_psum = 24;    // bits per partial-sum word
    std::int64_t multiplicity = 1;  // identical instances in the network

    std::int64_t macs() const { return m * k * n; }
};

struct Workload {
    std::string name;
    std::vector<GemmOp> ops;

    // multiplicity-weighted MAC total
    std::int64_t total_macs() const {
        std::int64_t t = 0;
        for (const auto& op : ops) t += op.multiplicity * op.macs();
        return t;
    }
};

// Throws ValidationError on any violated GemmOp invariant.
void validate_op(const GemmOp& op);
void validate_workload(const Workload& w);

// Parses a workload JSON document (see docs/formats.md). Unknown fields are
// rejected. Conv entries are lowered via im2col: M = batch*h_out*w_out,
// K = c_in*k_h*k_w, N = c_out. dw_psum defaults to
// min(dw_in + dw_w + ceil_log2(k), psum_max) raised to at least dw_out.
Workload parse_workload(const std::string& text);

// Collapses operators with identical (m, k, n, widths) into one op whose
// multiplicity is the group sum. First-occurrence order and id are kept.
Workload merge_operators(const Workload& w);

}  // namespace cimflow
