#pragma once

#include <vector>

#include "cimflow/isa.hpp"

namespace cimflow {

// Lowers a tiling plan into a deterministic engine-tagged instruction flow.
// Barriers are inserted whenever an instruction's buffer accesses conflict
// with accesses accumulated by the other engine since the previous barrier;
// disjoint phases stay barrier-free so the engines overlap.
// Throws ValidationError on a plan/config mismatch.
InstructionFlow lower(const TilingPlan& plan, const AcceleratorConfig& cfg);

// One memory-touching side of an instruction, with its conservative address
// span. EXT spans are bytes; IS/OS spans are bits; CIM spans are plane
// indices (bit addresses appear in the trace instead).
struct Access {
    Space space = Space::ext;
    Dir dir = Dir::rd;
    std::int64_t lo = 0, hi = 0;
    std::int64_t payload_bits = 0;
};

std::vector<Access> instruction_accesses(const Instruction& ins, const FlowHeader& h);

// Replays barrier segments and reports whether any instruction conflicts
// with accesses the opposite engine accumulated in the same segment; fills
// *why with the first offender when it returns false.
bool flow_hazard_free(const InstructionFlow& flow, std::string* why);

// Deterministic address trace: one record per memory-touching side.
std::vector<TraceRecord> emit_trace(const InstructionFlow& flow);

// Line-oriented text dump, one instruction per line: OPCODE engine args...
std::string flow_to_text(const InstructionFlow& flow);

// CSV with header idx,space,dir,addr,bits.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);

}  // namespace cimflow
