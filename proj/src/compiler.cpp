#include "cimflow/compiler.hpp"

#include <algorithm>
#include <sstream>

namespace cimflow {

namespace {

std::int64_t ceil8(std::int64_t bits) { return (bits + 7) / 8; }

// Write-port cycles for one weight column whose K extent crosses macro
// boundaries every al elements; each macro's segment pays its own ceiling.
std::int32_t column_port_cycles(std::int64_t k_len, int dw_w, std::int64_t al,
                                std::int64_t wuw) {
    std::int64_t full = k_len / al;
    std::int64_t rem = k_len % al;
    std::int64_t cycles = full * ceil_div_i(al * dw_w, wuw);
    if (rem > 0) cycles += ceil_div_i(rem * dw_w, wuw);
    return static_cast<std::int32_t>(cycles);
}

struct SpaceBox {
    std::int64_t rd_lo = 0, rd_hi = 0, wr_lo = 0, wr_hi = 0;
    bool any_rd = false, any_wr = false;

    void add(Dir dir, std::int64_t lo, std::int64_t hi) {
        if (dir == Dir::rd) {
            rd_lo = any_rd ? std::min(rd_lo, lo) : lo;
            rd_hi = any_rd ? std::max(rd_hi, hi) : hi;
            any_rd = true;
        } else {
            wr_lo = any_wr ? std::min(wr_lo, lo) : lo;
            wr_hi = any_wr ? std::max(wr_hi, hi) : hi;
            any_wr = true;
        }
    }
};

bool ranges_overlap(std::int64_t a_lo, std::int64_t a_hi, std::int64_t b_lo,
                    std::int64_t b_hi) {
    return a_lo < b_hi && b_lo < a_hi;
}

bool box_conflicts(const SpaceBox& opp, Dir dir, std::int64_t lo, std::int64_t hi) {
    if (dir == Dir::rd) return opp.any_wr && ranges_overlap(lo, hi, opp.wr_lo, opp.wr_hi);
    return (opp.any_rd && ranges_overlap(lo, hi, opp.rd_lo, opp.rd_hi)) ||
           (opp.any_wr && ranges_overlap(lo, hi, opp.wr_lo, opp.wr_hi));
}

std::uint64_t plane_mask(std::int64_t p0, std::int64_t p1) {
    if (p1 > 63) return ~0ull;  // saturate: treat as touching every plane
    std::uint64_t m = 0;
    for (std::int64_t p = p0; p < p1; ++p) m |= 1ull << p;
    return m;
}

struct EngineSet {
    SpaceBox ext, is, os;
    std::uint64_t cim_rd = 0, cim_wr = 0;

    void clear() { *this = EngineSet{}; }
};

// Every opcode touches at most two buffers.
int fill_accesses(const Instruction& ins, const FlowHeader& h, Access* out);

// True when one of the accesses races an access the opposite engine already
// holds in the current segment.
bool conflicts_with(const EngineSet& opp, const Access* acc, int n, bool simultaneous) {
    for (int i = 0; i < n; ++i) {
        const Access& a = acc[i];
        switch (a.space) {
            case Space::ext:
                if (box_conflicts(opp.ext, a.dir, a.lo, a.hi)) return true;
                break;
            case Space::is:
                if (box_conflicts(opp.is, a.dir, a.lo, a.hi)) return true;
                break;
            case Space::os:
                if (box_conflicts(opp.os, a.dir, a.lo, a.hi)) return true;
                break;
            case Space::cim: {
                std::uint64_t m = plane_mask(a.lo, a.hi);
                if (simultaneous) {
                    // plane-exact: only a true plane collision serializes
                    bool hit = a.dir == Dir::rd
                                   ? (m & opp.cim_wr) != 0
                                   : ((m & opp.cim_rd) | (m & opp.cim_wr)) != 0;
                    if (hit) return true;
                } else {
                    // the macro cannot compute and update at the same time
                    bool opp_any = opp.cim_rd != 0 || opp.cim_wr != 0;
                    bool write_side = a.dir == Dir::wr || opp.cim_wr != 0;
                    if (opp_any && write_side) return true;
                }
                break;
            }
        }
    }
    return false;
}

struct Emitter {
    const TilingPlan& plan;
    const AcceleratorConfig& cfg;
    FlowHeader h;
    std::vector<Instruction> body;
    EngineSet sets[2];
    bool segment_dirty = false;

    // input residency
    bool input_fit = false;
    std::int64_t tile_pitch_bits = 0;
    std::vector<char> tile_loaded;
    std::int64_t res_mi = -1, res_ki = -1;  // single resident tile (no fit)
    std::int64_t strip_m = -1, strip_k = -1;

    // CIM residency
    std::int64_t cim_kc = -1, cim_nc = -1;

    Emitter(const TilingPlan& p, const AcceleratorConfig& c) : plan(p), cfg(c) {}

    const GemmOp& op() const { return plan.op; }
    bool af() const { return plan.strategy.tiling == Tiling::af; }

    void conflict_check(const Access* acc, int n, Engine e) {
        const EngineSet& opp = sets[e == Engine::xfer ? 1 : 0];
        if (conflicts_with(opp, acc, n, cfg.macro.simultaneous_compute_update)) bar(false);
    }

    void absorb(const Access* acc, int n, Engine e) {
        EngineSet& own = sets[e == Engine::xfer ? 0 : 1];
        for (int i = 0; i < n; ++i) {
            const Access& a = acc[i];
            switch (a.space) {
                case Space::ext: own.ext.add(a.dir, a.lo, a.hi); break;
                case Space::is: own.is.add(a.dir, a.lo, a.hi); break;
                case Space::os: own.os.add(a.dir, a.lo, a.hi); break;
                case Space::cim: {
                    std::uint64_t m = plane_mask(a.lo, a.hi);
                    if (a.dir == Dir::rd)
                        own.cim_rd |= m;
                    else
                        own.cim_wr |= m;
                    break;
                }
            }
        }
    }

    void emit(Instruction ins) {
        ins.engine = engine_of(ins.opcode);
        Access acc[2];
        int n = fill_accesses(ins, h, acc);
        conflict_check(acc, n, ins.engine);
        absorb(acc, n, ins.engine);
        body.push_back(ins);
        segment_dirty = true;
    }

    void bar(bool force) {
        if (!segment_dirty && !force) return;
        if (force && !body.empty() && body.back().opcode == Opcode::bar) return;
        Instruction b;
        b.opcode = Opcode::bar;
        b.engine = Engine::compute;
        body.push_back(b);
        sets[0].clear();
        sets[1].clear();
        segment_dirty = false;
    }

    struct Window {
        std::int64_t k_base = 0, k_len = 0;
        std::int64_t n_base = 0, n_len = 0;
        std::int64_t planes = 0;
    };

    Window window(std::int64_t kc, std::int64_t nc) const {
        Window w;
        w.k_base = kc * plan.k_res;
        w.k_len = std::min(op().k - w.k_base, plan.k_res);
        w.n_base = nc * plan.n_res;
        w.n_len = std::min(op().n - w.n_base, plan.n_res);
        w.planes = af() ? ceil_div_i(w.k_len, h.plane_k) : ceil_div_i(w.n_len, h.plane_n);
        return w;
    }

    void upd_phase(std::int64_t kc, std::int64_t nc, const Window& w) {
        if (cim_kc == kc && cim_nc == nc) return;
        for (std::int64_t p = 0; p < w.planes; ++p) {
            std::int64_t pk_lo = af() ? w.k_base + p * h.plane_k : w.k_base;
            std::int64_t pk_hi = af() ? std::min(pk_lo + h.plane_k, w.k_base + w.k_len)
                                      : w.k_base + w.k_len;
            std::int64_t pn_lo = af() ? w.n_base : w.n_base + p * h.plane_n;
            std::int64_t pn_hi = af() ? w.n_base + w.n_len
                                      : std::min(pn_lo + h.plane_n, w.n_base + w.n_len);
            for (std::int64_t j = pn_lo; j < pn_hi; ++j) {
                Instruction ins;
                ins.opcode = Opcode::upd_w;
                ins.plane0 = static_cast<std::int32_t>(p);
                ins.plane1 = static_cast<std::int32_t>(p + 1);
                ins.k0 = static_cast<std::int32_t>(pk_lo);
                ins.k1 = static_cast<std::int32_t>(pk_hi);
                ins.n0 = static_cast<std::int32_t>(j);
                ins.n1 = static_cast<std::int32_t>(j + 1);
                ins.ext_addr = eff_weight_addr(h, pk_lo, j);
                ins.sram_addr =
                    p * h.cim_plane_bits + (j - pn_lo) * h.plane_k * op().dw_w;
                ins.bits = (pk_hi - pk_lo) * op().dw_w;
                ins.port_cycles =
                    column_port_cycles(pk_hi - pk_lo, op().dw_w, cfg.macro.al, cfg.macro.wuw);
                emit(ins);
            }
        }
        cim_kc = kc;
        cim_nc = nc;
    }

    // Loads the (mi, kc) input tile unless resident; returns its IS bit base.
    std::int64_t load_input(std::int64_t mi, std::int64_t kc, const Window& w) {
        std::int64_t m_lo = mi * plan.m_tile;
        std::int64_t m_hi = std::min(m_lo + plan.m_tile, op().m);
        std::int64_t key = mi * plan.k_outer + kc;
        std::int64_t base = input_fit ? key * tile_pitch_bits : 0;
        bool resident = input_fit ? tile_loaded[static_cast<std::size_t>(key)] != 0
                                  : (res_mi == mi && res_ki == kc);
        if (resident) return base;

        Instruction ins;
        ins.opcode = Opcode::ld_in;
        ins.m0 = static_cast<std::int32_t>(m_lo);
        ins.m1 = static_cast<std::int32_t>(m_hi);
        ins.k0 = static_cast<std::int32_t>(w.k_base);
        ins.k1 = static_cast<std::int32_t>(w.k_base + w.k_len);
        ins.ext_addr = eff_input_addr(h, m_lo, w.k_base);
        ins.sram_addr = base;
        ins.bits = (m_hi - m_lo) * w.k_len * op().dw_in;
        emit(ins);

        if (input_fit)
            tile_loaded[static_cast<std::size_t>(key)] = 1;
        else {
            res_mi = mi;
            res_ki = kc;
        }
        return base;
    }

    // One CMP/ACC round covering rows [g_lo,g_hi), planes [p0,p1), output
    // columns [c_lo,c_hi). Strip mode streams per-plane row strips instead.
    void emit_cmp_acc(std::int64_t g_lo, std::int64_t g_hi, const Window& w,
                      std::int64_t p0, std::int64_t p1, std::int64_t c_lo,
                      std::int64_t c_hi, std::int64_t is_base, std::int64_t tile_m_lo,
                      std::int64_t os_base, bool first) {
        if (!plan.strip_streaming) {
            Instruction c;
            c.opcode = Opcode::cmp;
            c.plane0 = static_cast<std::int32_t>(p0);
            c.plane1 = static_cast<std::int32_t>(p1);
            c.m0 = static_cast<std::int32_t>(g_lo);
            c.m1 = static_cast<std::int32_t>(g_hi);
            c.k0 = static_cast<std::int32_t>(w.k_base);
            c.k1 = static_cast<std::int32_t>(w.k_base + w.k_len);
            c.n0 = static_cast<std::int32_t>(c_lo);
            c.n1 = static_cast<std::int32_t>(c_hi);
            c.sram_addr = is_base + (g_lo - tile_m_lo) * w.k_len * op().dw_in;
            c.bits = (g_hi - g_lo) * w.k_len * op().dw_in;  // consumed input bits
            emit(c);

            Instruction a;
            a.opcode = Opcode::acc;
            a.plane0 = c.plane0;
            a.plane1 = c.plane1;
            a.m0 = c.m0;
            a.m1 = c.m1;
            a.n0 = c.n0;
            a.n1 = c.n1;
            a.sram_addr = os_base;
            a.first_acc = first;
            std::int64_t passes = af() ? p1 - p0 : 1;
            a.bits = passes * (g_hi - g_lo) * (c_hi - c_lo) * op().dw_psum;
            emit(a);
            return;
        }

        // Strip streaming (af, m_tile 1): IS holds one per-plane K strip.
        for (std::int64_t p = p0; p < p1; ++p) {
            std::int64_t pk_lo = w.k_base + p * h.plane_k;
            std::int64_t pk_hi = std::min(pk_lo + h.plane_k, w.k_base + w.k_len);
            if (strip_m != g_lo || strip_k != pk_lo) {
                Instruction ld;
                ld.opcode = Opcode::ld_in;
                ld.m0 = static_cast<std::int32_t>(g_lo);
                ld.m1 = static_cast<std::int32_t>(g_lo + 1);
                ld.k0 = static_cast<std::int32_t>(pk_lo);
                ld.k1 = static_cast<std::int32_t>(pk_hi);
                ld.ext_addr = eff_input_addr(h, g_lo, pk_lo);
                ld.sram_addr = 0;
                ld.bits = (pk_hi - pk_lo) * op().dw_in;
                emit(ld);
                strip_m = g_lo;
                strip_k = pk_lo;
            }
            Instruction c;
            c.opcode = Opcode::cmp;
            c.plane0 = static_cast<std::int32_t>(p);
            c.plane1 = static_cast<std::int32_t>(p + 1);
            c.m0 = static_cast<std::int32_t>(g_lo);
            c.m1 = static_cast<std::int32_t>(g_lo + 1);
            c.k0 = static_cast<std::int32_t>(pk_lo);
            c.k1 = static_cast<std::int32_t>(pk_hi);
            c.n0 = static_cast<std::int32_t>(c_lo);
            c.n1 = static_cast<std::int32_t>(c_hi);
            c.sram_addr = 0;
            c.bits = (pk_hi - pk_lo) * op().dw_in;
            emit(c);

            Instruction a;
            a.opcode = Opcode::acc;
            a.plane0 = c.plane0;
            a.plane1 = c.plane1;
            a.m0 = c.m0;
            a.m1 = c.m1;
            a.n0 = c.n0;
            a.n1 = c.n1;
            a.sram_addr = os_base;
            a.first_acc = first && p == p0;
            a.bits = (c_hi - c_lo) * op().dw_psum;
            emit(a);
        }
    }

    void emit_st_out(std::int64_t g_lo, std::int64_t g_hi, std::int64_t p0,
                     std::int64_t p1, std::int64_t c_lo, std::int64_t c_hi,
                     std::int64_t os_base) {
        Instruction s;
        s.opcode = Opcode::st_out;
        s.plane0 = static_cast<std::int32_t>(p0);
        s.plane1 = static_cast<std::int32_t>(p1);
        s.m0 = static_cast<std::int32_t>(g_lo);
        s.m1 = static_cast<std::int32_t>(g_hi);
        s.n0 = static_cast<std::int32_t>(c_lo);
        s.n1 = static_cast<std::int32_t>(c_hi);
        s.sram_addr = os_base;
        s.ext_addr = eff_output_addr(h, g_lo, c_lo);
        s.bits = (g_hi - g_lo) * (c_hi - c_lo) * op().dw_out;
        emit(s);
    }

    void emit_psum_move(Opcode opc, std::int64_t g_lo, std::int64_t g_hi,
                        std::int64_t c_lo, std::int64_t c_hi) {
        Instruction ins;
        ins.opcode = opc;
        ins.m0 = static_cast<std::int32_t>(g_lo);
        ins.m1 = static_cast<std::int32_t>(g_hi);
        ins.n0 = static_cast<std::int32_t>(c_lo);
        ins.n1 = static_cast<std::int32_t>(c_hi);
        ins.sram_addr = 0;
        ins.ext_addr = eff_spill_addr(h, g_lo, c_lo);
        ins.bits = (g_hi - g_lo) * (c_hi - c_lo) * op().dw_psum;
        emit(ins);
    }

    void body_chunk(std::int64_t mi, std::int64_t kc, std::int64_t nc) {
        Window w = window(kc, nc);
        upd_phase(kc, nc, w);

        std::int64_t m_lo = mi * plan.m_tile;
        std::int64_t m_hi = std::min(m_lo + plan.m_tile, op().m);
        std::int64_t n_end = w.n_base + w.n_len;
        bool last_k = kc == plan.k_outer - 1;
        bool first = kc == 0;

        std::int64_t is_base = 0;
        if (!plan.strip_streaming) is_base = load_input(mi, kc, w);

        if (!plan.psum_spill) {
            // Persistent psum blocks; row index is scope-relative.
            bool persistent = plan.strategy.temporal == Temporal::ip && plan.k_outer > 1;
            std::int64_t row_local = persistent ? m_lo : 0;
            std::int64_t os_base = row_local * h.os_pitch * op().dw_psum;
            emit_cmp_acc(m_lo, m_hi, w, 0, w.planes, w.n_base, n_end, is_base, m_lo,
                         os_base, first);
            if (last_k) emit_st_out(m_lo, m_hi, 0, w.planes, w.n_base, n_end, os_base);
            return;
        }

        // Spilling: psums stage at the OS base in column slabs of os_pitch
        // and row groups of whatever fits, round-tripping through external
        // memory between K chunks.
        struct Slab {
            std::int64_t p0, p1, c_lo, c_hi;
        };
        std::vector<Slab> slabs;
        if (h.os_pitch >= w.n_len) {
            slabs.push_back({0, w.planes, w.n_base, n_end});
        } else if (af()) {
            for (std::int64_t c = w.n_base; c < n_end; c += h.os_pitch)
                slabs.push_back({0, w.planes, c, std::min(c + h.os_pitch, n_end)});
        } else {
            for (std::int64_t p = 0; p < w.planes; ++p) {
                std::int64_t c = w.n_base + p * h.plane_n;
                slabs.push_back({p, p + 1, c, std::min(c + h.plane_n, n_end)});
            }
        }
        std::int64_t g = std::max<std::int64_t>(
            1, cfg.os_size / (h.os_pitch * op().dw_psum));
        for (const Slab& s : slabs) {
            for (std::int64_t g_lo = m_lo; g_lo < m_hi; g_lo += g) {
                std::int64_t g_hi = std::min(g_lo + g, m_hi);
                if (kc > 0) emit_psum_move(Opcode::ld_psum, g_lo, g_hi, s.c_lo, s.c_hi);
                emit_cmp_acc(g_lo, g_hi, w, s.p0, s.p1, s.c_lo, s.c_hi, is_base, m_lo,
                             0, first);
                if (!last_k)
                    emit_psum_move(Opcode::st_psum, g_lo, g_hi, s.c_lo, s.c_hi);
                else
                    emit_st_out(g_lo, g_hi, s.p0, s.p1, s.c_lo, s.c_hi, 0);
            }
        }
    }

    void run() {
        if (plan.strategy.temporal == Temporal::ip) {
            for (std::int64_t nc = 0; nc < plan.n_outer; ++nc)
                for (std::int64_t kc = 0; kc < plan.k_outer; ++kc)
                    for (std::int64_t mi = 0; mi < plan.m_outer; ++mi)
                        body_chunk(mi, kc, nc);
        } else {
            for (std::int64_t mi = 0; mi < plan.m_outer; ++mi)
                for (std::int64_t nc = 0; nc < plan.n_outer; ++nc)
                    for (std::int64_t kc = 0; kc < plan.k_outer; ++kc)
                        body_chunk(mi, kc, nc);
        }
        bar(true);
    }
};

FlowHeader build_header(const TilingPlan& plan, const AcceleratorConfig& cfg) {
    FlowHeader h;
    const GemmOp& op = plan.op;
    h.op_id = op.id;
    h.cfg_fingerprint = fingerprint(cfg);
    h.plan = plan;
    bool reversed = plan.strategy.spatial == Spatial::r;
    h.orig_m = reversed ? op.n : op.m;
    h.orig_n = reversed ? op.m : op.n;
    h.plane_k = cfg.mc * cfg.macro.al;
    h.plane_n = cfg.mr * cfg.macro.pc;
    h.cim_plane_bits = cfg.mr * cfg.mc * cfg.macro.al * cfg.macro.pc * op.dw_w;

    int phys_dw_in = reversed ? op.dw_w : op.dw_in;
    int phys_dw_w = reversed ? op.dw_in : op.dw_w;
    h.slot_in = ceil8(phys_dw_in);
    h.slot_w = ceil8(phys_dw_w);
    h.slot_out = ceil8(op.dw_out);
    h.slot_psum = ceil8(op.dw_psum);

    h.base_in = 0;
    h.base_w = h.base_in + h.orig_m * op.k * h.slot_in;
    h.base_out = h.base_w + op.k * h.orig_n * h.slot_w;
    h.base_spill = h.base_out + h.orig_m * h.orig_n * h.slot_out;
    h.ext_bytes = h.base_spill + (plan.psum_spill ? op.m * op.n * h.slot_psum : 0);

    bool pf = plan.strategy.tiling == Tiling::pf;
    if (plan.psum_spill) {
        h.os_scope_rows = 0;
        if (cfg.os_size >= plan.n_window * op.dw_psum)
            h.os_pitch = plan.n_window;
        else if (pf)
            h.os_pitch = h.plane_n;
        else
            h.os_pitch = std::max<std::int64_t>(
                1, std::min(plan.n_window, cfg.os_size / op.dw_psum));
    } else {
        h.os_pitch = pf ? h.plane_n : plan.n_window;
        bool persistent = plan.strategy.temporal == Temporal::ip && plan.k_outer > 1;
        h.os_scope_rows = persistent ? op.m : plan.m_tile;
    }
    h.is_bits = cfg.is_size;
    h.os_bits = cfg.os_size;
    h.cim_planes = cfg.macro.scr;
    h.simultaneous_compute_update = cfg.macro.simultaneous_compute_update;
    return h;
}

int fill_accesses(const Instruction& ins, const FlowHeader& h, Access* out) {
    const GemmOp& op = h.plan.op;
    bool pf = h.plan.strategy.tiling == Tiling::pf;
    std::int64_t rows = ins.m1 - ins.m0;
    std::int64_t k_len = ins.k1 - ins.k0;
    std::int64_t n_len = ins.n1 - ins.n0;

    // Conservative OS bit span of a psum box. Plane-blocked layouts (pf,
    // non-spill) add whole blocks; staging and af layouts are one block.
    auto os_span = [&](std::int64_t planes) {
        std::int64_t row_span = (rows - 1) * h.os_pitch + std::min(n_len, h.os_pitch);
        std::int64_t block =
            (pf && h.os_scope_rows > 0) ? h.os_scope_rows * h.os_pitch : 0;
        return ((planes - 1) * block + row_span) * op.dw_psum;
    };
    auto os_planes = [&] {
        return (pf && h.os_scope_rows > 0)
                   ? static_cast<std::int64_t>(ins.plane1 - ins.plane0)
                   : 1;
    };

    switch (ins.opcode) {
        case Opcode::ld_in: {
            std::int64_t slot = h.plan.strategy.spatial == Spatial::nr ? h.slot_in : h.slot_w;
            std::int64_t hi = eff_input_addr(h, ins.m1 - 1, ins.k1 - 1) + slot;
            out[0] = {Space::ext, Dir::rd, ins.ext_addr, hi, ins.bits};
            out[1] = {Space::is, Dir::wr, ins.sram_addr,
                      ins.sram_addr + rows * k_len * op.dw_in, ins.bits};
            return 2;
        }
        case Opcode::upd_w: {
            std::int64_t slot = h.plan.strategy.spatial == Spatial::nr ? h.slot_w : h.slot_in;
            out[0] = {Space::ext, Dir::rd, ins.ext_addr, ins.ext_addr + k_len * slot,
                      ins.bits};
            out[1] = {Space::cim, Dir::wr, ins.plane0, ins.plane1, ins.bits};
            return 2;
        }
        case Opcode::cmp: {
            out[0] = {Space::is, Dir::rd, ins.sram_addr,
                      ins.sram_addr + rows * k_len * op.dw_in, ins.bits};
            out[1] = {Space::cim, Dir::rd, ins.plane0, ins.plane1,
                      k_len * n_len * op.dw_w};
            return 2;
        }
        case Opcode::acc: {
            std::int64_t span = os_span(os_planes());
            out[0] = {Space::os, Dir::rd, ins.sram_addr, ins.sram_addr + span, ins.bits};
            out[1] = {Space::os, Dir::wr, ins.sram_addr, ins.sram_addr + span, ins.bits};
            return 2;
        }
        case Opcode::ld_psum: {
            std::int64_t hi = eff_spill_addr(h, ins.m1 - 1, ins.n1 - 1) + h.slot_psum;
            out[0] = {Space::ext, Dir::rd, ins.ext_addr, hi, ins.bits};
            out[1] = {Space::os, Dir::wr, ins.sram_addr, ins.sram_addr + os_span(1),
                      ins.bits};
            return 2;
        }
        case Opcode::st_psum: {
            std::int64_t hi = eff_spill_addr(h, ins.m1 - 1, ins.n1 - 1) + h.slot_psum;
            out[0] = {Space::os, Dir::rd, ins.sram_addr, ins.sram_addr + os_span(1),
                      ins.bits};
            out[1] = {Space::ext, Dir::wr, ins.ext_addr, hi, ins.bits};
            return 2;
        }
        case Opcode::st_out: {
            std::int64_t psum_bits = rows * n_len * op.dw_psum;
            out[0] = {Space::os, Dir::rd, ins.sram_addr,
                      ins.sram_addr + os_span(os_planes()), psum_bits};
            std::int64_t hi = eff_output_addr(h, ins.m1 - 1, ins.n1 - 1) + h.slot_out;
            out[1] = {Space::ext, Dir::wr, ins.ext_addr, hi, ins.bits};
            return 2;
        }
        case Opcode::bar:
            return 0;
    }
    return 0;
}

}  // namespace

InstructionFlow lower(const TilingPlan& plan, const AcceleratorConfig& cfg) {
    ResidentShape res = resident_shape(cfg, plan.strategy.tiling);
    if (res.k_res != plan.k_res || res.n_res != plan.n_res)
        throw ValidationError("plan resident shape does not match config");
    if (plan.m_tile < 1 || plan.m_tile > plan.op.m)
        throw ValidationError("plan m_tile out of range");

    Emitter em(plan, cfg);
    em.h = build_header(plan, cfg);
    em.tile_pitch_bits = plan.m_tile * plan.k_window * plan.op.dw_in;
    em.input_fit = !plan.strip_streaming &&
                   plan.m_outer * plan.k_outer * em.tile_pitch_bits <= cfg.is_size;
    if (em.input_fit)
        em.tile_loaded.assign(static_cast<std::size_t>(plan.m_outer * plan.k_outer), 0);
    em.run();

    InstructionFlow flow;
    flow.header = std::move(em.h);
    flow.body = std::move(em.body);
    return flow;
}

std::vector<Access> instruction_accesses(const Instruction& ins, const FlowHeader& h) {
    Access buf[2];
    int n = fill_accesses(ins, h, buf);
    return std::vector<Access>(buf, buf + n);
}

bool flow_hazard_free(const InstructionFlow& flow, std::string* why) {
    EngineSet sets[2];
    for (std::size_t i = 0; i < flow.body.size(); ++i) {
        const Instruction& ins = flow.body[i];
        if (ins.opcode == Opcode::bar) {
            sets[0].clear();
            sets[1].clear();
            continue;
        }
        Access acc[2];
        int n = fill_accesses(ins, flow.header, acc);
        const EngineSet& opp = sets[ins.engine == Engine::xfer ? 1 : 0];
        if (conflicts_with(opp, acc, n, flow.header.simultaneous_compute_update)) {
            if (why)
                *why = std::string(opcode_name(ins.opcode)) + " at index " +
                       std::to_string(i) + " races the other engine";
            return false;
        }
        EngineSet& own = sets[ins.engine == Engine::xfer ? 0 : 1];
        for (int j = 0; j < n; ++j) {
            const Access& a = acc[j];
            switch (a.space) {
                case Space::ext: own.ext.add(a.dir, a.lo, a.hi); break;
                case Space::is: own.is.add(a.dir, a.lo, a.hi); break;
                case Space::os: own.os.add(a.dir, a.lo, a.hi); break;
                case Space::cim:
                    if (a.dir == Dir::rd)
                        own.cim_rd |= plane_mask(a.lo, a.hi);
                    else
                        own.cim_wr |= plane_mask(a.lo, a.hi);
                    break;
            }
        }
    }
    return true;
}

std::vector<TraceRecord> emit_trace(const InstructionFlow& flow) {
    std::vector<TraceRecord> trace;
    trace.reserve(flow.body.size() * 2);
    for (std::size_t i = 0; i < flow.body.size(); ++i) {
        const Instruction& ins = flow.body[i];
        for (const auto& a : instruction_accesses(ins, flow.header)) {
            TraceRecord r;
            r.instr_index = static_cast<std::int64_t>(i);
            r.space = a.space;
            r.dir = a.dir;
            r.bits = a.payload_bits;
            if (a.space == Space::cim)
                r.addr = ins.opcode == Opcode::upd_w
                             ? ins.sram_addr
                             : ins.plane0 * flow.header.cim_plane_bits;
            else
                r.addr = a.lo;
            trace.push_back(r);
        }
    }
    return trace;
}

std::string flow_to_text(const InstructionFlow& flow) {
    std::ostringstream os;
    const FlowHeader& h = flow.header;
    os << "# op " << h.op_id << " strategy " << strategy_name(h.plan.strategy)
       << " fingerprint " << h.cfg_fingerprint << "\n";
    os << "# m " << h.plan.op.m << " k " << h.plan.op.k << " n " << h.plan.op.n << "\n";
    for (const auto& ins : flow.body) {
        os << opcode_name(ins.opcode) << ' '
           << (ins.engine == Engine::xfer ? "xfer" : "compute");
        if (ins.opcode == Opcode::bar) {
            os << "\n";
            continue;
        }
        if (ins.plane0 >= 0) os << " p=[" << ins.plane0 << ',' << ins.plane1 << ')';
        if (ins.m0 >= 0) os << " m=[" << ins.m0 << ',' << ins.m1 << ')';
        if (ins.k0 >= 0) os << " k=[" << ins.k0 << ',' << ins.k1 << ')';
        if (ins.n0 >= 0) os << " n=[" << ins.n0 << ',' << ins.n1 << ')';
        if (ins.ext_addr >= 0) os << " ext=" << ins.ext_addr;
        if (ins.sram_addr >= 0) os << " sram=" << ins.sram_addr;
        os << " bits=" << ins.bits;
        if (ins.port_cycles > 0) os << " port_cycles=" << ins.port_cycles;
        if (ins.first_acc) os << " first";
        os << "\n";
    }
    return os.str();
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
    std::ostringstream os;
    os << "idx,space,dir,addr,bits\n";
    for (const auto& r : trace)
        os << r.instr_index << ',' << space_name(r.space) << ',' << dir_name(r.dir) << ','
           << r.addr << ',' << r.bits << "\n";
    return os.str();
}

}  // namespace cimflow
