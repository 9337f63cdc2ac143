#include <doctest.h>

#include <random>

#include "cimflow/compiler.hpp"
#include "cimflow/oracle.hpp"

using namespace cimflow;

namespace {

MacroSpec proto_macro(bool simultaneous = false) {
    MacroSpec m;
    m.name = "proto";
    m.kind = MacroKind::digital;
    m.al = 64;
    m.pc = 8;
    m.scr = 2;
    m.icw = 512;
    m.wuw = 128;
    m.n_input_bitline = 8;
    m.simultaneous_compute_update = simultaneous;
    m.e_mac_pj = 0.04;
    return m;
}

AcceleratorConfig proto_cfg(bool simultaneous = false) {
    AcceleratorConfig cfg;
    cfg.macro = proto_macro(simultaneous);
    cfg.name = "g";
    cfg.mr = 2;
    cfg.mc = 1;
    cfg.bw = 128;
    cfg.is_size = 8192 * 4;
    cfg.os_size = 8192 * 2;
    return cfg;
}

GemmOp gemm(std::int64_t m, std::int64_t k, std::int64_t n) {
    GemmOp op;
    op.id = "t";
    op.m = m;
    op.k = k;
    op.n = n;
    op.dw_in = 8;
    op.dw_w = 8;
    op.dw_out = 8;
    op.dw_psum = 24;
    return op;
}

}  // namespace

TEST_CASE("random matrices are seeded and in range") {
    std::mt19937_64 a(7), b(7), c(8);
    Matrix ma = random_matrix(13, 9, 4, a);
    Matrix mb = random_matrix(13, 9, 4, b);
    Matrix mc = random_matrix(13, 9, 4, c);
    CHECK(ma.v == mb.v);
    CHECK(ma.v != mc.v);
    bool in_range = true;
    bool hit_low = false;
    for (std::int64_t x : ma.v) {
        in_range = in_range && x >= -8 && x <= 7;
        hit_low = hit_low || x < 0;
    }
    CHECK(in_range);
    CHECK(hit_low);
}

TEST_CASE("reference gemm on a hand case") {
    Matrix in = Matrix::zeros(2, 3);
    Matrix w = Matrix::zeros(3, 2);
    std::int64_t iv[] = {1, -2, 3, 0, 4, -1};
    std::int64_t wv[] = {2, 1, 0, -1, 5, 3};
    for (int i = 0; i < 6; ++i) {
        in.v[i] = iv[i];
        w.v[i] = wv[i];
    }
    Matrix out = reference_gemm(in, w);
    CHECK(out.at(0, 0) == 1 * 2 + (-2) * 0 + 3 * 5);
    CHECK(out.at(0, 1) == 1 * 1 + (-2) * (-1) + 3 * 3);
    CHECK(out.at(1, 0) == 0 * 2 + 4 * 0 + (-1) * 5);
    CHECK(out.at(1, 1) == 0 * 1 + 4 * (-1) + (-1) * 3);
}

TEST_CASE("verify_flow passes every strategy on representative shapes") {
    for (bool simultaneous : {false, true}) {
        AcceleratorConfig cfg = proto_cfg(simultaneous);
        for (const GemmOp& op : {gemm(6, 48, 20), gemm(17, 130, 9), gemm(1, 64, 33)}) {
            for (const auto& s : enumerate_strategies()) {
                InstructionFlow flow = lower(plan_tiling(op, cfg, s), cfg);
                VerificationReport rep = verify_flow(flow, op, 99);
                CAPTURE(strategy_name(s));
                CAPTURE(op.m);
                CAPTURE(simultaneous);
                CHECK(rep.numeric_match);
                CHECK(rep.coverage_ok);
                CHECK(rep.address_safety_ok);
                CHECK(rep.hazard_free);
                CHECK(rep.ok());
                CHECK(!rep.first_divergence.has_value());
            }
        }
    }
}

TEST_CASE("spilled flows verify too") {
    AcceleratorConfig cfg = proto_cfg();
    cfg.macro.scr = 1;
    cfg.os_size = 1024;
    GemmOp op = gemm(8, 256, 24);
    InstructionFlow flow = lower(plan_tiling(op, cfg, parse_strategy("NR-IP-AF")), cfg);
    REQUIRE(flow.header.plan.psum_spill);
    CHECK(verify_flow(flow, op, 3).ok());
}

TEST_CASE("a deleted compute pass is caught as coverage and numeric failure") {
    AcceleratorConfig cfg = proto_cfg();
    GemmOp op = gemm(6, 48, 20);
    InstructionFlow flow = lower(plan_tiling(op, cfg, parse_strategy("NR-IP-AF")), cfg);
    for (auto it = flow.body.rbegin(); it != flow.body.rend(); ++it) {
        if (it->opcode == Opcode::cmp) {
            flow.body.erase(std::next(it).base());
            break;
        }
    }
    VerificationReport rep = verify_flow(flow, op, 99);
    CHECK(!rep.ok());
    CHECK(!rep.coverage_ok);
    CHECK(!rep.numeric_match);
    REQUIRE(rep.first_divergence.has_value());
    CHECK(rep.first_divergence->description.find("missing MAC triple") !=
          std::string::npos);

    std::string text = report_to_text(rep);
    CHECK(text.find("numeric_match: FAIL") != std::string::npos);
    CHECK(text.find("coverage_ok: FAIL") != std::string::npos);
    CHECK(text.find("missing MAC triple") != std::string::npos);
}

TEST_CASE("an out-of-bounds store is caught as an address violation") {
    AcceleratorConfig cfg = proto_cfg();
    GemmOp op = gemm(6, 48, 20);
    InstructionFlow flow = lower(plan_tiling(op, cfg, parse_strategy("NR-IP-AF")), cfg);
    for (auto& ins : flow.body) {
        if (ins.opcode == Opcode::st_out) {
            ins.sram_addr += flow.header.os_bits;
            break;
        }
    }
    VerificationReport rep = verify_flow(flow, op, 99);
    CHECK(!rep.ok());
    CHECK(!rep.address_safety_ok);
    std::string text = report_to_text(rep);
    CHECK(text.find("address_safety_ok: FAIL") != std::string::npos);
}

TEST_CASE("clean reports print all PASS") {
    AcceleratorConfig cfg = proto_cfg();
    GemmOp op = gemm(4, 32, 8);
    InstructionFlow flow = lower(plan_tiling(op, cfg, parse_strategy("R-WP-AF")), cfg);
    VerificationReport rep = verify_flow(flow, op, 1);
    REQUIRE(rep.ok());
    std::string text = report_to_text(rep);
    CHECK(text.find("FAIL") == std::string::npos);
    CHECK(text.find("pass") != std::string::npos);
}
