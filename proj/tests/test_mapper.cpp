#include <doctest.h>

#include <vector>

#include "cimflow/common.hpp"
#include "cimflow/mapper.hpp"

using namespace cimflow;

namespace {

MacroSpec proto_macro() {
    MacroSpec m;
    m.name = "proto";
    m.kind = MacroKind::digital;
    m.al = 64;
    m.pc = 8;
    m.scr = 8;
    m.icw = 512;
    m.wuw = 128;
    m.n_input_bitline = 8;
    m.e_mac_pj = 0.04;
    return m;
}

AcceleratorConfig proto_cfg(std::int64_t is_bits, std::int64_t os_bits) {
    AcceleratorConfig cfg;
    cfg.macro = proto_macro();
    cfg.name = "g";
    cfg.mr = 1;
    cfg.mc = 1;
    cfg.bw = 128;
    cfg.is_size = is_bits;
    cfg.os_size = os_bits;
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

std::int64_t cdiv(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

TEST_CASE("strategy enumeration order and names") {
    auto all = enumerate_strategies();
    const char* want[8] = {"NR-IP-AF", "NR-IP-PF", "NR-WP-AF", "NR-WP-PF",
                           "R-IP-AF",  "R-IP-PF",  "R-WP-AF",  "R-WP-PF"};
    for (int i = 0; i < 8; ++i) CHECK(strategy_name(all[i]) == want[i]);

    auto base = spatial_only_strategies();
    CHECK(strategy_name(base[0]) == "NR-IP-AF");
    CHECK(strategy_name(base[1]) == "R-IP-AF");

    for (const auto& s : all) CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK_THROWS_AS(parse_strategy("NR-IP"), ParseError);
    CHECK_THROWS_AS(parse_strategy("nr-ip-af2"), ParseError);
}

TEST_CASE("spatial canonicalization swaps and inverts") {
    GemmOp op = gemm(48, 32, 80);
    op.dw_in = 4;
    op.dw_w = 6;

    GemmOp nr = canonicalize_spatial(op, Spatial::nr);
    CHECK(nr.m == 48);
    CHECK(nr.n == 80);
    CHECK(nr.dw_in == 4);

    GemmOp r = canonicalize_spatial(op, Spatial::r);
    CHECK(r.m == 80);
    CHECK(r.k == 32);
    CHECK(r.n == 48);
    CHECK(r.dw_in == 6);
    CHECK(r.dw_w == 4);
    CHECK(r.dw_out == op.dw_out);
    CHECK(r.dw_psum == op.dw_psum);
    CHECK(r.macs() == op.macs());

    GemmOp rr = canonicalize_spatial(r, Spatial::r);
    CHECK(rr.m == op.m);
    CHECK(rr.n == op.n);
    CHECK(rr.dw_in == op.dw_in);
    CHECK(rr.dw_w == op.dw_w);
}

TEST_CASE("plan geometry follows resident shape and SRAM capacity") {
    AcceleratorConfig cfg = proto_cfg(8192 * 8, 8192 * 4);
    GemmOp op = gemm(16, 1024, 64);

    TilingPlan af = plan_tiling(op, cfg, parse_strategy("NR-IP-AF"));
    CHECK(af.k_res == 512);  // scr*mc*al
    CHECK(af.n_res == 8);    // mr*pc
    CHECK(af.k_window == 512);
    CHECK(af.n_window == 8);
    CHECK(af.k_outer == cdiv(1024, 512));
    CHECK(af.n_outer == cdiv(64, 8));
    // m_tile = is / (k_window * dw_in) clamped to m
    CHECK(af.m_tile == std::min<std::int64_t>(16, 8192 * 8 / (512 * 8)));
    CHECK(af.m_outer == cdiv(16, af.m_tile));
    CHECK(af.planes == 8);

    TilingPlan pf = plan_tiling(op, cfg, parse_strategy("NR-IP-PF"));
    CHECK(pf.k_res == 64);   // mc*al
    CHECK(pf.n_res == 64);   // scr*mr*pc
    CHECK(pf.k_outer == cdiv(1024, 64));
    CHECK(pf.n_outer == 1);
    CHECK(pf.planes == 8);
}

TEST_CASE("loop order names the interchange") {
    AcceleratorConfig cfg = proto_cfg(8192 * 8, 8192 * 4);
    GemmOp op = gemm(64, 1024, 64);

    TilingPlan ip = plan_tiling(op, cfg, parse_strategy("NR-IP-AF"));
    TilingPlan wp = plan_tiling(op, cfg, parse_strategy("NR-WP-AF"));
    REQUIRE(ip.loop_order.size() == 3);
    REQUIRE(wp.loop_order.size() == 3);
    CHECK(ip.loop_order[0] == "n_outer");
    CHECK(ip.loop_order[1] == "k_outer");
    CHECK(ip.loop_order[2] == "m_outer");  // inner loop walks input tiles
    CHECK(wp.loop_order[0] == "m_outer");
    CHECK(wp.loop_order[1] == "n_outer");
    CHECK(wp.loop_order[2] == "k_outer");  // inner loop refreshes weights
}

TEST_CASE("psum spill tracks the footprint against OS capacity") {
    GemmOp op = gemm(8, 256, 32);
    AcceleratorConfig roomy = proto_cfg(8192 * 8, 8192 * 4);
    roomy.macro.scr = 1;  // k_res 64 so K needs four resident windows
    TilingPlan fits = plan_tiling(op, roomy, parse_strategy("NR-IP-AF"));
    CHECK(!fits.psum_spill);
    CHECK(fits.footprint_os_bits <= roomy.os_size);
    CHECK(fits.k_outer == 4);

    AcceleratorConfig tight = roomy;
    tight.os_size = 1024;  // below the 8x8x24 = 1536 bit psum footprint
    TilingPlan spill = plan_tiling(op, tight, parse_strategy("NR-IP-AF"));
    CHECK(spill.psum_spill);
    CHECK(spill.footprint_os_bits > tight.os_size);
    CHECK(spill.k_outer == 4);
}

TEST_CASE("infeasible SRAMs throw") {
    GemmOp op = gemm(8, 256, 32);
    AcceleratorConfig no_os = proto_cfg(8192 * 8, 8);  // cannot hold one psum row
    CHECK_THROWS_AS(plan_tiling(op, no_os, parse_strategy("NR-IP-AF")),
                    InfeasiblePlanError);
    AcceleratorConfig no_is = proto_cfg(16, 8192 * 4);  // cannot hold one strip
    CHECK_THROWS_AS(plan_tiling(op, no_is, parse_strategy("NR-IP-AF")),
                    InfeasiblePlanError);
}

TEST_CASE("R strategies plan on the canonicalized problem") {
    AcceleratorConfig cfg = proto_cfg(8192 * 8, 8192 * 4);
    GemmOp op = gemm(16, 128, 512);
    TilingPlan r = plan_tiling(op, cfg, parse_strategy("R-IP-AF"));
    CHECK(r.op.m == 512);
    CHECK(r.op.n == 16);
    CHECK(r.n_outer == cdiv(16, r.n_res));
    CHECK(r.m_outer == cdiv(512, r.m_tile));
}

TEST_CASE("plan_to_json names the strategy and trip counts") {
    AcceleratorConfig cfg = proto_cfg(8192 * 8, 8192 * 4);
    TilingPlan p = plan_tiling(gemm(16, 1024, 64), cfg, parse_strategy("NR-WP-PF"));
    std::string j = plan_to_json(p);
    CHECK(j.find("NR-WP-PF") != std::string::npos);
    CHECK(j.find("k_outer") != std::string::npos);
    CHECK(j.find("psum_spill") != std::string::npos);
}
