#include "cimflow/simulator.hpp"

#include <algorithm>
#include <unordered_map>

namespace cimflow {

namespace {

struct ExtImage {
    std::vector<std::uint8_t> bytes;

    std::int64_t size() const { return static_cast<std::int64_t>(bytes.size()); }

    std::int64_t read(std::int64_t addr, std::int64_t slot, int width) const {
        if (addr < 0 || addr + slot > size())
            throw ValidationError("external read out of bounds at byte " +
                                  std::to_string(addr));
        std::uint64_t raw = 0;
        for (std::int64_t b = 0; b < slot; ++b)
            raw |= static_cast<std::uint64_t>(bytes[static_cast<std::size_t>(addr + b)])
                   << (8 * b);
        return wrap_signed(static_cast<std::int64_t>(raw), width);
    }

    void write(std::int64_t addr, std::int64_t slot, int width, std::int64_t value) {
        if (addr < 0 || addr + slot > size())
            throw ValidationError("external write out of bounds at byte " +
                                  std::to_string(addr));
        std::uint64_t mask = width >= 64 ? ~0ull : (1ull << width) - 1;
        std::uint64_t u = static_cast<std::uint64_t>(value) & mask;
        for (std::int64_t b = 0; b < slot; ++b)
            bytes[static_cast<std::size_t>(addr + b)] =
                static_cast<std::uint8_t>(u >> (8 * b));
    }
};

std::int64_t lookup(const std::unordered_map<std::int64_t, std::int64_t>& m,
                    std::int64_t key, const char* what) {
    auto it = m.find(key);
    if (it == m.end())
        throw ValidationError(std::string("read of never-written ") + what + " at " +
                              std::to_string(key));
    return it->second;
}

}  // namespace

SimReport simulate(const InstructionFlow& flow, const AcceleratorConfig& cfg,
                   const CostCoefficients& coeffs) {
    const FlowHeader& h = flow.header;
    if (h.cfg_fingerprint != fingerprint(cfg))
        throw ValidationError("flow was lowered for a different accelerator config");

    const GemmOp& op = h.plan.op;
    const std::int64_t pass_cycles = compute_cycles(cfg.macro, op.dw_in);

    SimReport r;
    r.psum_spill = h.plan.psum_spill;
    double e_compute = 0, e_update = 0, e_is = 0, e_os = 0, e_ema = 0;

    std::int64_t t_xfer = 0, t_compute = 0, acc_debt = 0;

    auto join = [&] {
        t_compute += acc_debt;
        r.compute_busy_cycles += acc_debt;
        acc_debt = 0;
        r.stall_cycles["bandwidth_bound"] += std::max<std::int64_t>(0, t_xfer - t_compute);
        r.stall_cycles["hazard_bound"] += std::max<std::int64_t>(0, t_compute - t_xfer);
        r.cycles += std::max(t_xfer, t_compute);
        t_xfer = 0;
        t_compute = 0;
    };

    for (const Instruction& ins : flow.body) {
        ++r.instr_counts[opcode_name(ins.opcode)];
        switch (ins.opcode) {
            case Opcode::ld_in: {
                std::int64_t dur = ceil_div_i(ins.bits, cfg.bw);
                t_xfer += dur;
                r.xfer_busy_cycles += dur;
                r.traffic_bits.ext_rd += ins.bits;
                r.traffic_bits.is_wr += ins.bits;
                e_ema += static_cast<double>(ins.bits) * coeffs.e_ema;
                e_is += static_cast<double>(ins.bits) * coeffs.e_is_wr;
                break;
            }
            case Opcode::upd_w: {
                // Bus streaming and the macro write port overlap.
                std::int64_t dur = std::max<std::int64_t>(ceil_div_i(ins.bits, cfg.bw),
                                                          ins.port_cycles);
                t_xfer += dur;
                r.xfer_busy_cycles += dur;
                r.traffic_bits.ext_rd += ins.bits;
                r.traffic_bits.cim_wr += ins.bits;
                e_update += static_cast<double>(ins.bits) * coeffs.e_cim_update;
                break;
            }
            case Opcode::cmp: {
                std::int64_t passes =
                    static_cast<std::int64_t>(ins.plane1 - ins.plane0) * (ins.m1 - ins.m0);
                std::int64_t dur = passes * pass_cycles;
                acc_debt -= std::min(acc_debt, dur);  // accumulates hide under passes
                t_compute += dur;
                r.compute_busy_cycles += dur;
                std::int64_t box_macs = static_cast<std::int64_t>(ins.m1 - ins.m0) *
                                        (ins.k1 - ins.k0) * (ins.n1 - ins.n0);
                r.macs += box_macs;
                e_compute += static_cast<double>(box_macs) * cfg.macro.e_mac_pj;
                r.traffic_bits.is_rd += ins.bits;
                e_is += static_cast<double>(ins.bits) * coeffs.e_is_rd;
                break;
            }
            case Opcode::acc: {
                acc_debt +=
                    static_cast<std::int64_t>(ins.plane1 - ins.plane0) * (ins.m1 - ins.m0);
                r.traffic_bits.os_rd += ins.bits;
                r.traffic_bits.os_wr += ins.bits;
                e_os += static_cast<double>(ins.bits) * (coeffs.e_os_rd + coeffs.e_os_wr);
                break;
            }
            case Opcode::ld_psum: {
                std::int64_t dur = ceil_div_i(ins.bits, cfg.bw);
                t_xfer += dur;
                r.xfer_busy_cycles += dur;
                r.traffic_bits.ext_rd += ins.bits;
                r.traffic_bits.os_wr += ins.bits;
                double ema = static_cast<double>(ins.bits) * coeffs.e_ema;
                e_ema += ema;
                r.ema_psum_pj += ema;
                e_os += static_cast<double>(ins.bits) * coeffs.e_os_wr;
                break;
            }
            case Opcode::st_psum: {
                std::int64_t dur = ceil_div_i(ins.bits, cfg.bw);
                t_xfer += dur;
                r.xfer_busy_cycles += dur;
                r.traffic_bits.os_rd += ins.bits;
                r.traffic_bits.ext_wr += ins.bits;
                double ema = static_cast<double>(ins.bits) * coeffs.e_ema;
                e_ema += ema;
                r.ema_psum_pj += ema;
                e_os += static_cast<double>(ins.bits) * coeffs.e_os_rd;
                break;
            }
            case Opcode::st_out: {
                std::int64_t dur = ceil_div_i(ins.bits, cfg.bw);
                t_xfer += dur;
                r.xfer_busy_cycles += dur;
                std::int64_t psum_bits = static_cast<std::int64_t>(ins.m1 - ins.m0) *
                                         (ins.n1 - ins.n0) * op.dw_psum;
                r.traffic_bits.os_rd += psum_bits;
                r.traffic_bits.ext_wr += ins.bits;
                e_os += static_cast<double>(psum_bits) * coeffs.e_os_rd;
                e_ema += static_cast<double>(ins.bits) * coeffs.e_ema;
                break;
            }
            case Opcode::bar:
                join();
                break;
        }
    }
    if (t_xfer > 0 || t_compute > 0 || acc_debt > 0) join();

    r.energy_breakdown["cim_compute"] = e_compute;
    r.energy_breakdown["cim_update"] = e_update;
    r.energy_breakdown["input_sram"] = e_is;
    r.energy_breakdown["output_sram"] = e_os;
    r.energy_breakdown["ema"] = e_ema;
    r.energy_pj = e_compute + e_update + e_is + e_os + e_ema;
    r.wall_time_us = static_cast<double>(r.cycles) / cfg.macro.freq_mhz;
    double peak = peak_macs_per_cycle(cfg, op.dw_in);
    r.cim_utilization =
        r.cycles > 0 ? static_cast<double>(r.macs) / (peak * static_cast<double>(r.cycles))
                     : 0.0;
    return r;
}

Matrix functional_execute(const InstructionFlow& flow, const Matrix& inputs,
                          const Matrix& weights) {
    const FlowHeader& h = flow.header;
    const GemmOp& op = h.plan.op;
    if (inputs.rows != h.orig_m || inputs.cols != op.k)
        throw ValidationError("input matrix shape mismatch");
    if (weights.rows != op.k || weights.cols != h.orig_n)
        throw ValidationError("weight matrix shape mismatch");
    if (h.ext_bytes > (256ll << 20))
        throw ValidationError("external image too large for functional replay");

    bool nr = h.plan.strategy.spatial == Spatial::nr;
    int phys_dw_in = nr ? op.dw_in : op.dw_w;
    int phys_dw_w = nr ? op.dw_w : op.dw_in;
    std::int64_t slot_eff_in = nr ? h.slot_in : h.slot_w;
    std::int64_t slot_eff_w = nr ? h.slot_w : h.slot_in;

    ExtImage img;
    img.bytes.assign(static_cast<std::size_t>(h.ext_bytes), 0);
    for (std::int64_t i = 0; i < h.orig_m; ++i)
        for (std::int64_t k = 0; k < op.k; ++k)
            img.write(h.base_in + (i * op.k + k) * h.slot_in, h.slot_in, phys_dw_in,
                      inputs.at(i, k));
    for (std::int64_t j = 0; j < h.orig_n; ++j)
        for (std::int64_t k = 0; k < op.k; ++k)
            img.write(h.base_w + (j * op.k + k) * h.slot_w, h.slot_w, phys_dw_w,
                      weights.at(k, j));

    std::unordered_map<std::int64_t, std::int64_t> is, os, pending, cim;
    std::vector<std::int64_t> wbuf, acc_buf;

    for (const Instruction& ins : flow.body) {
        switch (ins.opcode) {
            case Opcode::ld_in: {
                std::int64_t k_len = ins.k1 - ins.k0;
                std::int64_t base = eff_input_addr(h, ins.m0, ins.k0);
                for (std::int64_t rr = ins.m0; rr < ins.m1; ++rr)
                    for (std::int64_t kk = ins.k0; kk < ins.k1; ++kk) {
                        std::int64_t addr =
                            ins.ext_addr + (eff_input_addr(h, rr, kk) - base);
                        is[ins.sram_addr +
                           ((rr - ins.m0) * k_len + (kk - ins.k0)) * op.dw_in] =
                            img.read(addr, slot_eff_in, op.dw_in);
                    }
                break;
            }
            case Opcode::upd_w: {
                std::int64_t base = eff_weight_addr(h, ins.k0, ins.n0);
                for (std::int64_t kk = ins.k0; kk < ins.k1; ++kk) {
                    std::int64_t addr = ins.ext_addr + (eff_weight_addr(h, kk, ins.n0) - base);
                    cim[kk * op.n + ins.n0] = img.read(addr, slot_eff_w, op.dw_w);
                }
                break;
            }
            case Opcode::cmp: {
                std::int64_t rows = ins.m1 - ins.m0;
                std::int64_t k_len = ins.k1 - ins.k0;
                std::int64_t n_len = ins.n1 - ins.n0;
                wbuf.resize(static_cast<std::size_t>(k_len * n_len));
                for (std::int64_t kk = 0; kk < k_len; ++kk)
                    for (std::int64_t c = 0; c < n_len; ++c)
                        wbuf[static_cast<std::size_t>(kk * n_len + c)] =
                            lookup(cim, (ins.k0 + kk) * op.n + ins.n0 + c, "CIM weight");
                acc_buf.assign(static_cast<std::size_t>(rows * n_len), 0);
                for (std::int64_t rr = 0; rr < rows; ++rr)
                    for (std::int64_t kk = 0; kk < k_len; ++kk) {
                        std::uint64_t av = static_cast<std::uint64_t>(
                            lookup(is,
                                   ins.sram_addr + (rr * k_len + kk) * op.dw_in,
                                   "IS input"));
                        for (std::int64_t c = 0; c < n_len; ++c)
                            acc_buf[static_cast<std::size_t>(rr * n_len + c)] =
                                static_cast<std::int64_t>(
                                    static_cast<std::uint64_t>(
                                        acc_buf[static_cast<std::size_t>(rr * n_len + c)]) +
                                    av * static_cast<std::uint64_t>(
                                             wbuf[static_cast<std::size_t>(kk * n_len + c)]));
                    }
                for (std::int64_t rr = 0; rr < rows; ++rr)
                    for (std::int64_t c = 0; c < n_len; ++c) {
                        std::int64_t key = (ins.m0 + rr) * op.n + ins.n0 + c;
                        pending[key] = static_cast<std::int64_t>(
                            static_cast<std::uint64_t>(pending[key]) +
                            static_cast<std::uint64_t>(
                                acc_buf[static_cast<std::size_t>(rr * n_len + c)]));
                    }
                break;
            }
            case Opcode::acc: {
                for (std::int64_t rr = ins.m0; rr < ins.m1; ++rr)
                    for (std::int64_t c = ins.n0; c < ins.n1; ++c) {
                        auto it = pending.find(rr * op.n + c);
                        if (it == pending.end())
                            throw ValidationError("accumulate without a pending partial");
                        std::int64_t p = it->second;
                        pending.erase(it);
                        std::int64_t a = os_elem_addr(h, ins, rr, c);
                        if (ins.first_acc)
                            os[a] = wrap_signed(p, op.dw_psum);
                        else {
                            std::int64_t old = lookup(os, a, "OS psum");
                            os[a] = wrap_signed(
                                static_cast<std::int64_t>(static_cast<std::uint64_t>(old) +
                                                          static_cast<std::uint64_t>(p)),
                                op.dw_psum);
                        }
                    }
                break;
            }
            case Opcode::ld_psum: {
                std::int64_t base = eff_spill_addr(h, ins.m0, ins.n0);
                for (std::int64_t rr = ins.m0; rr < ins.m1; ++rr)
                    for (std::int64_t c = ins.n0; c < ins.n1; ++c) {
                        std::int64_t addr = ins.ext_addr + (eff_spill_addr(h, rr, c) - base);
                        os[os_elem_addr(h, ins, rr, c)] =
                            img.read(addr, h.slot_psum, op.dw_psum);
                    }
                break;
            }
            case Opcode::st_psum: {
                std::int64_t base = eff_spill_addr(h, ins.m0, ins.n0);
                for (std::int64_t rr = ins.m0; rr < ins.m1; ++rr)
                    for (std::int64_t c = ins.n0; c < ins.n1; ++c) {
                        std::int64_t v = lookup(os, os_elem_addr(h, ins, rr, c), "OS psum");
                        std::int64_t addr = ins.ext_addr + (eff_spill_addr(h, rr, c) - base);
                        img.write(addr, h.slot_psum, op.dw_psum, v);
                    }
                break;
            }
            case Opcode::st_out: {
                std::int64_t base = eff_output_addr(h, ins.m0, ins.n0);
                for (std::int64_t rr = ins.m0; rr < ins.m1; ++rr)
                    for (std::int64_t c = ins.n0; c < ins.n1; ++c) {
                        std::int64_t v = lookup(os, os_elem_addr(h, ins, rr, c), "OS psum");
                        std::int64_t addr = ins.ext_addr + (eff_output_addr(h, rr, c) - base);
                        img.write(addr, h.slot_out, op.dw_out, wrap_signed(v, op.dw_out));
                    }
                break;
            }
            case Opcode::bar:
                break;
        }
    }

    Matrix out = Matrix::zeros(h.orig_m, h.orig_n);
    for (std::int64_t i = 0; i < h.orig_m; ++i)
        for (std::int64_t j = 0; j < h.orig_n; ++j)
            out.at(i, j) =
                img.read(h.base_out + (i * h.orig_n + j) * h.slot_out, h.slot_out, op.dw_out);
    return out;
}

}  // namespace cimflow
