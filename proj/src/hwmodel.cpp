#include "cimflow/hwmodel.hpp"

namespace cimflow {

namespace {

std::int64_t bits_per_input_cycle(const MacroSpec& macro) {
    return macro.kind == MacroKind::digital ? macro.n_input_bitline : macro.dac_precision;
}

}  // namespace

std::int64_t derive_icw(const MacroSpec& macro) {
    return macro.al * bits_per_input_cycle(macro);
}

std::int64_t compute_cycles(const MacroSpec& macro, int dw_in) {
    return static_cast<std::int64_t>(ceil_div(static_cast<std::uint64_t>(dw_in),
                                              static_cast<std::uint64_t>(bits_per_input_cycle(macro))));
}

std::int64_t update_cycles(const MacroSpec& macro, int dw_w) {
    return static_cast<std::int64_t>(
        ceil_div(static_cast<std::uint64_t>(macro.al) * static_cast<std::uint64_t>(dw_w),
                 static_cast<std::uint64_t>(macro.wuw)));
}

ResidentShape resident_shape(const AcceleratorConfig& cfg, Tiling tiling) {
    const auto& m = cfg.macro;
    if (tiling == Tiling::af)
        return {m.scr * cfg.mc * m.al, cfg.mr * m.pc};
    return {cfg.mc * m.al, m.scr * cfg.mr * m.pc};
}

double area_of(const AcceleratorConfig& cfg, const CostCoefficients& c) {
    double macros = static_cast<double>(cfg.mr * cfg.mc);
    double per_macro =
        cfg.macro.a_compute_mm2 + static_cast<double>(cfg.macro.scr) * cfg.macro.a_bank_mm2;
    return macros * per_macro + bits_to_kb(cfg.is_size) * c.a_is +
           bits_to_kb(cfg.os_size) * c.a_os + c.a_fixed;
}

double peak_macs_per_cycle(const AcceleratorConfig& cfg, int dw_in) {
    double per_pass =
        static_cast<double>(cfg.mr * cfg.mc * cfg.macro.al * cfg.macro.pc);
    return per_pass / static_cast<double>(compute_cycles(cfg.macro, dw_in));
}

std::int64_t compute_cycle_floor(const AcceleratorConfig& cfg, std::int64_t m,
                                 std::int64_t k, std::int64_t n, int dw_in) {
    // mr*mc*al*pc MACs land per activation pass; each pass takes compute_cycles.
    std::uint64_t macs_per_pass =
        static_cast<std::uint64_t>(cfg.mr * cfg.mc * cfg.macro.al * cfg.macro.pc);
    std::uint64_t passes =
        ceil_div(static_cast<std::uint64_t>(m) * k * n, macs_per_pass);
    return static_cast<std::int64_t>(passes) * compute_cycles(cfg.macro, dw_in);
}

std::int64_t bandwidth_cycle_floor(const AcceleratorConfig& cfg, std::int64_t m,
                                   std::int64_t k, std::int64_t n, int dw_in,
                                   int dw_w, int dw_out) {
    // Every operand crosses the bus at least once.
    std::uint64_t bits = static_cast<std::uint64_t>(m) * k * dw_in +
                         static_cast<std::uint64_t>(k) * n * dw_w +
                         static_cast<std::uint64_t>(m) * n * dw_out;
    return static_cast<std::int64_t>(ceil_div(bits, static_cast<std::uint64_t>(cfg.bw)));
}

void validate_macro(const MacroSpec& macro) {
    if (macro.al <= 0 || macro.pc <= 0 || macro.scr <= 0)
        throw ValidationError("macro '" + macro.name + "': al, pc, scr must be positive");
    if (macro.wuw <= 0)
        throw ValidationError("macro '" + macro.name + "': wuw must be positive");
    if (macro.freq_mhz <= 0.0)
        throw ValidationError("macro '" + macro.name + "': freq_mhz must be positive");
    if (macro.e_mac_pj < 0.0 || macro.a_compute_mm2 < 0.0 || macro.a_bank_mm2 < 0.0)
        throw ValidationError("macro '" + macro.name + "': energies and areas must be >= 0");
    const char* field =
        macro.kind == MacroKind::digital ? "n_input_bitline" : "dac_precision";
    if (bits_per_input_cycle(macro) <= 0)
        throw ValidationError("macro '" + macro.name + "': " + field + " must be positive");
    if (macro.icw != derive_icw(macro))
        throw ValidationError("macro '" + macro.name + "': icw " + std::to_string(macro.icw) +
                              " contradicts al * " + field + " = " +
                              std::to_string(derive_icw(macro)));
}

void validate_config(const AcceleratorConfig& cfg) {
    validate_macro(cfg.macro);
    if (cfg.mr <= 0 || cfg.mc <= 0)
        throw ValidationError("config '" + cfg.name + "': mr, mc must be positive");
    if (cfg.bw <= 0)
        throw ValidationError("config '" + cfg.name + "': bw must be positive");
    if (cfg.is_size <= 0 || cfg.os_size <= 0)
        throw ValidationError("config '" + cfg.name + "': SRAM sizes must be positive");
}

std::uint64_t fingerprint(const AcceleratorConfig& cfg) {
    std::uint64_t h = fnv1a(nullptr, 0);
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.macro.kind));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.macro.al));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.macro.pc));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.macro.scr));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.macro.wuw));
    h = fnv1a_append(h, static_cast<std::uint64_t>(bits_per_input_cycle(cfg.macro)));
    h = fnv1a_append(h, cfg.macro.simultaneous_compute_update ? 1u : 0u);
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.mr));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.mc));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.bw));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.is_size));
    h = fnv1a_append(h, static_cast<std::uint64_t>(cfg.os_size));
    return h;
}

}  // namespace cimflow
