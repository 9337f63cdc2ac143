#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cimflow/mapper.hpp"

namespace cimflow {

enum class Opcode : std::uint8_t { ld_in, upd_w, cmp, acc, ld_psum, st_psum, st_out, bar };
enum class Engine : std::uint8_t { xfer, compute };

const char* opcode_name(Opcode op);
Engine engine_of(Opcode op);

// One engine-tagged instruction. Coordinate ranges are half-open and live in
// the canonical (post-spatial) problem space. Unused fields are -1.
//
//   ld_in    XFER  loads rows [m0,m1) x K slice [k0,k1) from external memory
//                  into IS at sram_addr.
//   upd_w    XFER  writes the weight column for output channel n0, K extent
//                  [k0,k1), into plane plane0 at CIM bit offset sram_addr;
//                  port_cycles carries the per-macro write-port latency.
//   cmp      COMPUTE one array pass per plane in [plane0,plane1) per row in
//                  [m0,m1); covers the dense MAC box [m0,m1)x[k0,k1)x[n0,n1).
//   acc      COMPUTE folds the pass results into OS psums at sram_addr;
//                  first_acc initializes instead of accumulating.
//   ld_psum  XFER  spilled psums, external -> OS staging.
//   st_psum  XFER  OS staging -> external spill region.
//   st_out   XFER  converts psums to dw_out and writes the output region.
//   bar      joins both engines.
struct Instruction {
    Opcode opcode = Opcode::bar;
    Engine engine = Engine::compute;
    bool first_acc = false;
    std::int32_t plane0 = -1, plane1 = -1;
    std::int32_t m0 = -1, m1 = -1;
    std::int32_t k0 = -1, k1 = -1;
    std::int32_t n0 = -1, n1 = -1;
    std::int32_t port_cycles = 0;
    std::int64_t ext_addr = -1;   // byte offset into external memory
    std::int64_t sram_addr = -1;  // bit offset into IS, OS, or CIM (upd_w)
    std::int64_t bits = 0;        // payload bits moved or consumed
};

// External memory layout (bytes): inputs row-major, weights column-major,
// outputs row-major, then the psum spill region. Element slots are
// byte-aligned at ceil(dw/8); payload bit counts use the true datawidths.
struct FlowHeader {
    std::string op_id;
    std::uint64_t cfg_fingerprint = 0;
    TilingPlan plan;
    std::int64_t orig_m = 0, orig_n = 0;  // pre-canonicalization output dims
    std::int64_t plane_k = 0;             // K extent of one plane (mc*al)
    std::int64_t plane_n = 0;             // N extent of one plane (mr*pc)
    std::int64_t cim_plane_bits = 0;      // mr*mc*al*pc*dw_w
    std::int64_t slot_in = 0, slot_w = 0, slot_out = 0, slot_psum = 0;  // bytes
    std::int64_t base_in = 0, base_w = 0, base_out = 0, base_spill = 0;
    std::int64_t ext_bytes = 0;
    // OS layout: row pitch in psum elements, and the per-plane block height
    // in rows (0 means flat staging at the buffer base, used when spilling).
    std::int64_t os_pitch = 0;
    std::int64_t os_scope_rows = 0;
    // Capacity bounds and the macro update/compute concurrency flag, copied
    // from the config so a flow can be validated on its own.
    std::int64_t is_bits = 0;
    std::int64_t os_bits = 0;
    std::int64_t cim_planes = 0;
    bool simultaneous_compute_update = false;
};

struct InstructionFlow {
    FlowHeader header;
    std::vector<Instruction> body;
};

// Byte addresses of canonical-space elements, oriented through the spatial
// swap: under R the "input" element lives in the weight region and vice
// versa, and outputs land transposed in the original output region.
std::int64_t eff_input_addr(const FlowHeader& h, std::int64_t i, std::int64_t k);
std::int64_t eff_weight_addr(const FlowHeader& h, std::int64_t k, std::int64_t j);
std::int64_t eff_output_addr(const FlowHeader& h, std::int64_t i, std::int64_t j);
std::int64_t eff_spill_addr(const FlowHeader& h, std::int64_t i, std::int64_t j);

// OS bit address of the psum element (r, c) addressed by a psum-box
// instruction (acc, st_out, ld_psum, st_psum).
std::int64_t os_elem_addr(const FlowHeader& h, const Instruction& ins, std::int64_t r,
                          std::int64_t c);

enum class Space : std::uint8_t { ext, is, os, cim };
enum class Dir : std::uint8_t { rd, wr };

struct TraceRecord {
    std::int64_t instr_index = 0;
    Space space = Space::ext;
    Dir dir = Dir::rd;
    std::int64_t addr = 0;  // EXT: bytes; IS/OS/CIM: bits
    std::int64_t bits = 0;
};

const char* space_name(Space s);
const char* dir_name(Dir d);

}  // namespace cimflow
