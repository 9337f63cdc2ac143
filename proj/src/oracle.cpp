#include "cimflow/oracle.hpp"

#include <limits>
#include <sstream>
#include <vector>

#include "cimflow/common.hpp"

namespace cimflow {

Matrix random_matrix(std::int64_t rows, std::int64_t cols, int width, std::mt19937_64& rng) {
    std::int64_t lo = width >= 64 ? std::numeric_limits<std::int64_t>::min()
                                  : -(std::int64_t(1) << (width - 1));
    std::int64_t hi = width >= 64 ? std::numeric_limits<std::int64_t>::max()
                                  : (std::int64_t(1) << (width - 1)) - 1;
    std::uniform_int_distribution<std::int64_t> dist(lo, hi);
    Matrix m = Matrix::zeros(rows, cols);
    for (auto& x : m.v) x = dist(rng);
    return m;
}

Matrix reference_gemm(const Matrix& inputs, const Matrix& weights) {
    if (inputs.cols != weights.rows) throw ValidationError("reference_gemm: dim mismatch");
    Matrix out = Matrix::zeros(inputs.rows, weights.cols);
    for (std::int64_t i = 0; i < inputs.rows; ++i)
        for (std::int64_t j = 0; j < weights.cols; ++j) {
            std::uint64_t acc = 0;
            for (std::int64_t k = 0; k < inputs.cols; ++k)
                acc += static_cast<std::uint64_t>(inputs.at(i, k)) *
                       static_cast<std::uint64_t>(weights.at(k, j));
            out.at(i, j) = static_cast<std::int64_t>(acc);
        }
    return out;
}

namespace {

bool same_op(const GemmOp& a, const GemmOp& b) {
    return a.m == b.m && a.k == b.k && a.n == b.n && a.dw_in == b.dw_in &&
           a.dw_w == b.dw_w && a.dw_out == b.dw_out && a.dw_psum == b.dw_psum;
}

std::string triple(std::int64_t m, std::int64_t k, std::int64_t n) {
    std::ostringstream os;
    os << "(" << m << "," << k << "," << n << ")";
    return os.str();
}

}  // namespace

VerificationReport verify_flow(const InstructionFlow& flow, const GemmOp& op,
                               std::uint64_t seed) {
    VerificationReport rep;
    rep.numeric_match = rep.coverage_ok = rep.address_safety_ok = rep.hazard_free = true;
    auto fail = [&](bool& flag, std::string desc, std::int64_t idx) {
        flag = false;
        if (!rep.first_divergence) rep.first_divergence = Divergence{std::move(desc), idx};
    };

    const FlowHeader& h = flow.header;
    if (!same_op(canonicalize_spatial(op, h.plan.strategy.spatial), h.plan.op)) {
        rep.numeric_match = rep.coverage_ok = rep.hazard_free = false;
        fail(rep.address_safety_ok, "flow header operator does not match the given operator",
             -1);
        return rep;
    }

    // Address safety: every conservative access span inside its space, and
    // UPD_W bit offsets inside the CIM array.
    for (std::size_t i = 0; i < flow.body.size(); ++i) {
        const Instruction& ins = flow.body[i];
        if (ins.opcode == Opcode::bar) continue;
        for (const Access& a : instruction_accesses(ins, h)) {
            std::int64_t cap = 0;
            const char* what = "";
            switch (a.space) {
                case Space::ext: cap = h.ext_bytes; what = "external"; break;
                case Space::is: cap = h.is_bits; what = "input SRAM"; break;
                case Space::os: cap = h.os_bits; what = "output SRAM"; break;
                case Space::cim: cap = h.cim_planes; what = "CIM plane"; break;
            }
            if (a.lo < 0 || a.hi < a.lo || a.hi > cap) {
                std::ostringstream os;
                os << opcode_name(ins.opcode) << " " << what << " span [" << a.lo << ","
                   << a.hi << ") exceeds capacity " << cap;
                fail(rep.address_safety_ok, os.str(), static_cast<std::int64_t>(i));
                break;
            }
        }
        if (ins.opcode == Opcode::upd_w &&
            (ins.sram_addr < 0 || ins.sram_addr + ins.bits > h.cim_planes * h.cim_plane_bits)) {
            fail(rep.address_safety_ok, "UPD_W bit offset exceeds the CIM array",
                 static_cast<std::int64_t>(i));
        }
    }

    std::string why;
    if (!flow_hazard_free(flow, &why)) fail(rep.hazard_free, why, -1);

    // Exact-once MAC coverage over the canonical (m,k,n) grid, taken from the
    // CMP boxes in the instruction stream. Small grids get a per-triple
    // bitmap; larger ones fall back to bounds plus total-volume conservation.
    const GemmOp& cop = h.plan.op;
    unsigned __int128 cells = static_cast<unsigned __int128>(cop.m) *
                              static_cast<unsigned __int128>(cop.k) *
                              static_cast<unsigned __int128>(cop.n);
    const unsigned __int128 kBitmapCap = 1u << 26;
    bool boxes_ok = true;
    unsigned __int128 volume = 0;
    std::vector<std::uint64_t> seen;
    if (cells <= kBitmapCap) seen.assign((static_cast<std::size_t>(cells) + 63) / 64, 0);
    for (std::size_t i = 0; i < flow.body.size() && boxes_ok; ++i) {
        const Instruction& ins = flow.body[i];
        if (ins.opcode != Opcode::cmp) continue;
        if (ins.m0 < 0 || ins.m1 > cop.m || ins.k0 < 0 || ins.k1 > cop.k || ins.n0 < 0 ||
            ins.n1 > cop.n || ins.m0 >= ins.m1 || ins.k0 >= ins.k1 || ins.n0 >= ins.n1) {
            fail(rep.coverage_ok, "CMP box out of operator range", static_cast<std::int64_t>(i));
            boxes_ok = false;
            break;
        }
        volume += static_cast<unsigned __int128>(ins.m1 - ins.m0) *
                  static_cast<unsigned __int128>(ins.k1 - ins.k0) *
                  static_cast<unsigned __int128>(ins.n1 - ins.n0);
        if (seen.empty()) continue;
        for (std::int64_t m = ins.m0; m < ins.m1 && boxes_ok; ++m)
            for (std::int64_t k = ins.k0; k < ins.k1 && boxes_ok; ++k) {
                std::size_t base = static_cast<std::size_t>((m * cop.k + k) * cop.n);
                for (std::int64_t n = ins.n0; n < ins.n1; ++n) {
                    std::size_t idx = base + static_cast<std::size_t>(n);
                    std::uint64_t bit = 1ull << (idx & 63);
                    if (seen[idx >> 6] & bit) {
                        fail(rep.coverage_ok, "duplicate MAC triple " + triple(m, k, n),
                             static_cast<std::int64_t>(i));
                        boxes_ok = false;
                        break;
                    }
                    seen[idx >> 6] |= bit;
                }
            }
    }
    if (boxes_ok) {
        if (!seen.empty()) {
            for (std::size_t idx = 0; idx < static_cast<std::size_t>(cells); ++idx)
                if (!(seen[idx >> 6] & (1ull << (idx & 63)))) {
                    std::int64_t n = static_cast<std::int64_t>(idx) % cop.n;
                    std::int64_t mk = static_cast<std::int64_t>(idx) / cop.n;
                    fail(rep.coverage_ok,
                         "missing MAC triple " + triple(mk / cop.k, mk % cop.k, n), -1);
                    break;
                }
        } else if (volume != cells) {
            fail(rep.coverage_ok, "CMP volume does not equal m*k*n", -1);
        }
    }

    // Functional replay on seeded operands against the exact reference,
    // wrapped to the psum/output widths the datapath carries.
    std::mt19937_64 rng(seed);
    Matrix inputs = random_matrix(op.m, op.k, op.dw_in, rng);
    Matrix weights = random_matrix(op.k, op.n, op.dw_w, rng);
    Matrix expect = reference_gemm(inputs, weights);
    for (auto& x : expect.v) x = wrap_signed(wrap_signed(x, op.dw_psum), op.dw_out);
    try {
        Matrix got = functional_execute(flow, inputs, weights);
        for (std::int64_t i = 0; i < op.m && rep.numeric_match; ++i)
            for (std::int64_t j = 0; j < op.n; ++j)
                if (got.at(i, j) != expect.at(i, j)) {
                    std::ostringstream os;
                    os << "output[" << i << "][" << j << "] expected " << expect.at(i, j)
                       << " got " << got.at(i, j);
                    fail(rep.numeric_match, os.str(), -1);
                    break;
                }
    } catch (const std::exception& e) {
        fail(rep.numeric_match, std::string("functional replay failed: ") + e.what(), -1);
    }

    return rep;
}

std::string report_to_text(const VerificationReport& rep) {
    std::ostringstream os;
    auto line = [&](const char* name, bool v) {
        os << name << ": " << (v ? "pass" : "FAIL") << "\n";
    };
    line("numeric_match", rep.numeric_match);
    line("coverage_ok", rep.coverage_ok);
    line("address_safety_ok", rep.address_safety_ok);
    line("hazard_free", rep.hazard_free);
    if (rep.first_divergence) {
        os << "first_divergence: " << rep.first_divergence->description;
        if (rep.first_divergence->instr_index >= 0)
            os << " (instruction " << rep.first_divergence->instr_index << ")";
        os << "\n";
    }
    return os.str();
}

}  // namespace cimflow
