#include <doctest.h>

#include <cmath>

#include "cimflow/common.hpp"
#include "cimflow/hwmodel.hpp"

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
    m.freq_mhz = 1000.0;
    m.e_mac_pj = 0.04;
    m.a_compute_mm2 = 0.032;
    m.a_bank_mm2 = 0.012;
    return m;
}

AcceleratorConfig grid(MacroSpec macro, std::int64_t mr, std::int64_t mc,
                       std::int64_t bw, std::int64_t is_bits, std::int64_t os_bits) {
    AcceleratorConfig cfg;
    cfg.macro = std::move(macro);
    cfg.name = "g";
    cfg.mr = mr;
    cfg.mc = mc;
    cfg.bw = bw;
    cfg.is_size = is_bits;
    cfg.os_size = os_bits;
    return cfg;
}

}  // namespace

TEST_CASE("digital macro port timing") {
    MacroSpec m = proto_macro();
    CHECK(derive_icw(m) == 512);
    CHECK(compute_cycles(m, 8) == 1);   // 512 icw absorbs 64 rows x 8 bits at once
    CHECK(compute_cycles(m, 16) == 2);
    CHECK(compute_cycles(m, 3) == 1);
    CHECK(update_cycles(m, 8) == 4);    // 64*8 / 128
    CHECK(update_cycles(m, 2) == 1);
    CHECK(update_cycles(m, 16) == 8);
}

TEST_CASE("analog macro timing follows dac precision") {
    MacroSpec m;
    m.name = "an";
    m.kind = MacroKind::analog;
    m.al = 64;
    m.pc = 4;
    m.scr = 2;
    m.icw = 64;
    m.wuw = 64;
    m.dac_precision = 1;
    CHECK(derive_icw(m) == 64);
    CHECK(compute_cycles(m, 8) == 8);  // one bit per row per cycle
    CHECK(compute_cycles(m, 1) == 1);
    CHECK(update_cycles(m, 8) == 8);   // 64*8 / 64
    validate_macro(m);
}

TEST_CASE("validate_macro rejects contradictions") {
    MacroSpec m = proto_macro();
    validate_macro(m);

    MacroSpec bad_icw = m;
    bad_icw.icw = 256;  // contradicts al * n_input_bitline = 512
    CHECK_THROWS_AS(validate_macro(bad_icw), ValidationError);

    MacroSpec neg = m;
    neg.al = 0;
    CHECK_THROWS_AS(validate_macro(neg), ValidationError);

    MacroSpec bad_freq = m;
    bad_freq.freq_mhz = 0.0;
    CHECK_THROWS_AS(validate_macro(bad_freq), ValidationError);

    MacroSpec bad_e = m;
    bad_e.e_mac_pj = -0.1;
    CHECK_THROWS_AS(validate_macro(bad_e), ValidationError);
}

TEST_CASE("resident shape per tiling") {
    MacroSpec m = proto_macro();
    m.scr = 16;
    m.al = 64;
    m.pc = 8;
    m.icw = 512;
    AcceleratorConfig cfg = grid(m, 2, 2, 128, 8192 * 1024, 8192 * 128);

    ResidentShape af = resident_shape(cfg, Tiling::af);
    CHECK(af.k_res == 16 * 2 * 64);  // scr*mc*al = 2048
    CHECK(af.n_res == 2 * 8);        // mr*pc = 16

    ResidentShape pf = resident_shape(cfg, Tiling::pf);
    CHECK(pf.k_res == 2 * 64);        // mc*al = 128
    CHECK(pf.n_res == 16 * 2 * 8);    // scr*mr*pc = 256
}

TEST_CASE("area model") {
    CostCoefficients c;
    c.e_ema = 0.6;
    c.a_is = 0.004;
    c.a_os = 0.006;
    c.a_fixed = 0.1;
    AcceleratorConfig cfg = grid(proto_macro(), 2, 3, 128, 8192 * 16, 8192 * 4);
    // 6 macros * (0.032 + 8*0.012) + 0.004*16 + 0.006*4 + 0.1
    double want = 6 * (0.032 + 8 * 0.012) + 0.064 + 0.024 + 0.1;
    CHECK(area_of(cfg, c) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("cycle floors") {
    AcceleratorConfig cfg = grid(proto_macro(), 2, 2, 128, 8192 * 64, 8192 * 16);
    // peak MACs/cycle at 8-bit inputs: mr*mc*al*pc / compute_cycles = 4*512/1
    CHECK(peak_macs_per_cycle(cfg, 8) == doctest::Approx(2048.0));
    std::int64_t m = 64, k = 256, n = 64;
    std::int64_t cf = compute_cycle_floor(cfg, m, k, n, 8);
    CHECK(cf == (m * k * n + 2047) / 2048);
    std::int64_t mandatory_bits = m * k * 8 + k * n * 8 + m * n * 8;
    std::int64_t bf = bandwidth_cycle_floor(cfg, m, k, n, 8, 8, 8);
    CHECK(bf == (mandatory_bits + 127) / 128);
}

TEST_CASE("fingerprint tracks parameters, not names") {
    AcceleratorConfig a = grid(proto_macro(), 2, 2, 128, 8192, 8192);
    AcceleratorConfig b = a;
    b.name = "other";
    b.macro.name = "renamed";
    CHECK(fingerprint(a) == fingerprint(b));

    AcceleratorConfig c = a;
    c.bw = 64;
    CHECK(fingerprint(a) != fingerprint(c));

    AcceleratorConfig d = a;
    d.macro.scr = 4;
    CHECK(fingerprint(a) != fingerprint(d));

    AcceleratorConfig e = a;
    e.macro.simultaneous_compute_update = true;
    CHECK(fingerprint(a) != fingerprint(e));
}

TEST_CASE("validate_config rejects degenerate grids") {
    AcceleratorConfig cfg = grid(proto_macro(), 1, 1, 128, 8192, 8192);
    validate_config(cfg);
    AcceleratorConfig bad = cfg;
    bad.bw = 0;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
    bad = cfg;
    bad.mr = 0;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
    bad = cfg;
    bad.is_size = 0;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
}
