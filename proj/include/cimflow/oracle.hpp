#pragma once

#include <optional>
#include <random>
#include <string>

#include "cimflow/compiler.hpp"
#include "cimflow/simulator.hpp"

namespace cimflow {

// Uniform signed values that fit `width` bits: [-2^(w-1), 2^(w-1)).
Matrix random_matrix(std::int64_t rows, std::int64_t cols, int width, std::mt19937_64& rng);

// Exact triple-loop integer GEMM, the independent ground truth.
Matrix reference_gemm(const Matrix& inputs, const Matrix& weights);

struct Divergence {
    std::string description;
    std::int64_t instr_index = -1;  // -1 when not tied to one instruction
};

struct VerificationReport {
    bool numeric_match = false;
    bool coverage_ok = false;       // every (m,k,n) MAC triple exactly once
    bool address_safety_ok = false; // every access inside its space
    bool hazard_free = false;       // no cross-engine race inside a segment
    std::optional<Divergence> first_divergence;

    bool ok() const { return numeric_match && coverage_ok && address_safety_ok && hazard_free; }
};

// Seeds random matrices sized to op, replays the flow functionally, and
// checks numeric equality against the reference, exact-once MAC coverage,
// address safety, and hazard freedom. Failures land in the report; nothing
// throws.
VerificationReport verify_flow(const InstructionFlow& flow, const GemmOp& op,
                               std::uint64_t seed);

std::string report_to_text(const VerificationReport& rep);

}  // namespace cimflow
