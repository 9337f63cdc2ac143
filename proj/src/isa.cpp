#include "cimflow/isa.hpp"

namespace cimflow {

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::ld_in: return "LD_IN";
        case Opcode::upd_w: return "UPD_W";
        case Opcode::cmp: return "CMP";
        case Opcode::acc: return "ACC";
        case Opcode::ld_psum: return "LD_PSUM";
        case Opcode::st_psum: return "ST_PSUM";
        case Opcode::st_out: return "ST_OUT";
        case Opcode::bar: return "BAR";
    }
    return "?";
}

Engine engine_of(Opcode op) {
    return op == Opcode::cmp || op == Opcode::acc ? Engine::compute : Engine::xfer;
}

const char* space_name(Space s) {
    switch (s) {
        case Space::ext: return "EXT";
        case Space::is: return "IS";
        case Space::os: return "OS";
        case Space::cim: return "CIM";
    }
    return "?";
}

const char* dir_name(Dir d) { return d == Dir::rd ? "RD" : "WR"; }

std::int64_t eff_input_addr(const FlowHeader& h, std::int64_t i, std::int64_t k) {
    if (h.plan.strategy.spatial == Spatial::nr)
        return h.base_in + (i * h.plan.op.k + k) * h.slot_in;
    // Canonical input row i is physical weight column i (column-major).
    return h.base_w + (i * h.plan.op.k + k) * h.slot_w;
}

std::int64_t eff_weight_addr(const FlowHeader& h, std::int64_t k, std::int64_t j) {
    if (h.plan.strategy.spatial == Spatial::nr)
        return h.base_w + (j * h.plan.op.k + k) * h.slot_w;
    // Canonical weight column j is physical input row j (row-major).
    return h.base_in + (j * h.plan.op.k + k) * h.slot_in;
}

std::int64_t eff_output_addr(const FlowHeader& h, std::int64_t i, std::int64_t j) {
    if (h.plan.strategy.spatial == Spatial::nr)
        return h.base_out + (i * h.orig_n + j) * h.slot_out;
    return h.base_out + (j * h.orig_n + i) * h.slot_out;  // transposed writeback
}

std::int64_t eff_spill_addr(const FlowHeader& h, std::int64_t i, std::int64_t j) {
    return h.base_spill + (i * h.plan.op.n + j) * h.slot_psum;
}

std::int64_t os_elem_addr(const FlowHeader& h, const Instruction& ins, std::int64_t r,
                          std::int64_t c) {
    std::int64_t col = c - ins.n0;
    std::int64_t block = 0;
    // Plane-blocked layout (pf, non-spilling): each plane owns a block of
    // os_scope_rows rows; columns wrap per plane. Staging layouts are flat.
    if (h.plan.strategy.tiling == Tiling::pf && h.os_scope_rows > 0) {
        std::int64_t p_off = col / h.plane_n;
        block = (ins.plane0 + p_off) * h.os_scope_rows * h.os_pitch * h.plan.op.dw_psum;
        col -= p_off * h.plane_n;
    }
    return block + ins.sram_addr + ((r - ins.m0) * h.os_pitch + col) * h.plan.op.dw_psum;
}

}  // namespace cimflow
