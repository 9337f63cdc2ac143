#include "cimflow/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_map>

#include "cimflow/common.hpp"
#include "cimflow/compiler.hpp"

namespace cimflow {

const char* objective_name(Objective o) {
    return o == Objective::energy_eff ? "energy_eff" : "throughput";
}

Objective parse_objective(const std::string& s) {
    if (s == "energy_eff" || s == "energy") return Objective::energy_eff;
    if (s == "throughput") return Objective::throughput;
    throw ParseError("unknown objective '" + s + "' (energy_eff | throughput)");
}

namespace {

std::vector<std::int64_t> sorted_unique(std::vector<std::int64_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<std::int64_t> keep_pow2(const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> out;
    for (auto x : v)
        if (is_pow2(x)) out.push_back(x);
    return out;
}

}  // namespace

SearchSpace prune_space(const SearchSpace& raw, std::int64_t bw, const MacroSpec& macro) {
    if (raw.mr.empty() || raw.mc.empty() || raw.scr.empty() || raw.is_size.empty() ||
        raw.os_size.empty())
        throw ValidationError("search space has an empty raw candidate list");
    SearchSpace out = raw;
    out.macro = macro;
    out.bw = bw;
    out.stats.raw_points = raw.points();
    if (macro.icw < bw)
        throw EmptySpaceError("space eliminated: macro input-compute bandwidth (icw " +
                              std::to_string(macro.icw) + ") is below the bus width " +
                              std::to_string(bw));
    if (macro.wuw < bw)
        throw EmptySpaceError("space eliminated: macro weight-update bandwidth (wuw " +
                              std::to_string(macro.wuw) + ") is below the bus width " +
                              std::to_string(bw));
    out.mr = sorted_unique(raw.mr);
    out.mc = sorted_unique(raw.mc);
    out.scr = keep_pow2(sorted_unique(raw.scr));
    out.is_size = keep_pow2(sorted_unique(raw.is_size));
    out.os_size = keep_pow2(sorted_unique(raw.os_size));
    if (out.scr.empty())
        throw EmptySpaceError("space eliminated: no power-of-two scr candidate");
    if (out.is_size.empty())
        throw EmptySpaceError("space eliminated: no power-of-two is_size candidate");
    if (out.os_size.empty())
        throw EmptySpaceError("space eliminated: no power-of-two os_size candidate");
    out.stats.kept_points = out.points();
    return out;
}

AcceleratorConfig space_config(const SearchSpace& space, std::int64_t mr, std::int64_t mc,
                               std::int64_t scr, std::int64_t is_bits, std::int64_t os_bits) {
    AcceleratorConfig cfg;
    cfg.macro = space.macro;
    cfg.macro.scr = scr;
    cfg.mr = mr;
    cfg.mc = mc;
    cfg.bw = space.bw;
    cfg.is_size = is_bits;
    cfg.os_size = os_bits;
    std::ostringstream os;
    os << "mr" << mr << "_mc" << mc << "_scr" << scr << "_is" << is_bits << "_os" << os_bits;
    cfg.name = os.str();
    return cfg;
}

namespace {

std::uint64_t op_signature(const GemmOp& op) {
    std::uint64_t h = fnv1a_append(0xcbf29ce484222325ull, static_cast<std::uint64_t>(op.m));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.k));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.n));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.dw_in));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.dw_w));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.dw_out));
    h = fnv1a_append(h, static_cast<std::uint64_t>(op.dw_psum));
    return h;
}

struct Chosen {
    MappingStrategy strategy;
    SimReport report;
};

// Objective-minimal strategy for one operator; first strictly-better wins so
// enumeration order breaks ties.
std::optional<Chosen> pick_strategy(const AcceleratorConfig& cfg, const GemmOp& op,
                                    const CostCoefficients& coeffs, Objective objective,
                                    const std::vector<MappingStrategy>& menu,
                                    std::int64_t* evals) {
    std::optional<Chosen> best;
    double best_scalar = 0.0;
    for (const MappingStrategy& s : menu) {
        TilingPlan plan;
        try {
            plan = plan_tiling(op, cfg, s);
        } catch (const InfeasiblePlanError&) {
            continue;
        }
        InstructionFlow flow = lower(plan, cfg);
        SimReport rep = simulate(flow, cfg, coeffs);
        ++*evals;
        double scalar = objective == Objective::energy_eff ? rep.energy_pj
                                                           : static_cast<double>(rep.cycles);
        if (!best || scalar < best_scalar) {
            best = Chosen{s, std::move(rep)};
            best_scalar = scalar;
        }
    }
    return best;
}

}  // namespace

EvalResult evaluate_with(const AcceleratorConfig& cfg, const Workload& w,
                         const CostCoefficients& coeffs, Objective objective,
                         const std::vector<MappingStrategy>& menu) {
    if (menu.empty()) throw ValidationError("empty strategy menu");
    if (w.ops.empty()) throw ValidationError("empty workload");
    EvalResult res;
    res.area_mm2 = area_of(cfg, coeffs);

    // Aggregation buckets keyed by operator signature: one representative
    // report plus total multiplicity, accumulated in first-occurrence order
    // so merged and unrolled workloads sum identically.
    struct Bucket {
        SimReport rep;
        std::int64_t mult = 0;
    };
    std::vector<Bucket> buckets;
    std::unordered_map<std::uint64_t, std::size_t> by_sig;
    for (const GemmOp& op : w.ops) {
        std::optional<Chosen> ch =
            pick_strategy(cfg, op, coeffs, objective, menu, &res.per_op_evaluations);
        if (!ch)
            throw InfeasiblePlanError("operator '" + op.id + "' fits no strategy on config " +
                                      cfg.name);
        std::uint64_t sig = op_signature(op);
        auto it = by_sig.find(sig);
        if (it == by_sig.end()) {
            by_sig.emplace(sig, buckets.size());
            buckets.push_back(Bucket{ch->report, op.multiplicity});
        } else {
            buckets[it->second].mult += op.multiplicity;
        }
        res.per_op.push_back(OpChoice{op.id, ch->strategy, op.multiplicity,
                                      std::move(ch->report)});
    }

    SimReport& agg = res.aggregate;
    double total_macs = 0.0;
    double peak_cycle_area = 0.0;  // sum of peak-MACs*cycles, for utilization
    for (const Bucket& b : buckets) {
        const SimReport& r = b.rep;
        double m = static_cast<double>(b.mult);
        agg.cycles += r.cycles * b.mult;
        agg.wall_time_us += r.wall_time_us * m;
        agg.energy_pj += r.energy_pj * m;
        for (const auto& [key, pj] : r.energy_breakdown) agg.energy_breakdown[key] += pj * m;
        agg.ema_psum_pj += r.ema_psum_pj * m;
        agg.traffic_bits.ext_rd += r.traffic_bits.ext_rd * b.mult;
        agg.traffic_bits.ext_wr += r.traffic_bits.ext_wr * b.mult;
        agg.traffic_bits.is_rd += r.traffic_bits.is_rd * b.mult;
        agg.traffic_bits.is_wr += r.traffic_bits.is_wr * b.mult;
        agg.traffic_bits.os_rd += r.traffic_bits.os_rd * b.mult;
        agg.traffic_bits.os_wr += r.traffic_bits.os_wr * b.mult;
        agg.traffic_bits.cim_wr += r.traffic_bits.cim_wr * b.mult;
        agg.macs += r.macs * b.mult;
        for (const auto& [key, cyc] : r.stall_cycles) agg.stall_cycles[key] += cyc * b.mult;
        agg.xfer_busy_cycles += r.xfer_busy_cycles * b.mult;
        agg.compute_busy_cycles += r.compute_busy_cycles * b.mult;
        for (const auto& [key, cnt] : r.instr_counts) agg.instr_counts[key] += cnt * b.mult;
        agg.psum_spill = agg.psum_spill || r.psum_spill;
        total_macs += static_cast<double>(r.macs) * m;
        if (r.cim_utilization > 0.0)
            peak_cycle_area += static_cast<double>(r.macs) * m / r.cim_utilization;
    }
    agg.cim_utilization = peak_cycle_area > 0.0 ? total_macs / peak_cycle_area : 0.0;

    res.total_ops = 2.0 * total_macs;
    if (objective == Objective::energy_eff) {
        res.objective_scalar = agg.energy_pj / res.total_ops;
        res.objective_value = res.objective_scalar;
    } else {
        res.objective_scalar = agg.wall_time_us / res.total_ops;
        res.objective_value = res.total_ops / agg.wall_time_us / 1000.0;  // GOPS
    }
    return res;
}

EvalResult evaluate(const AcceleratorConfig& cfg, const Workload& w,
                    const CostCoefficients& coeffs, Objective objective) {
    auto all = enumerate_strategies();
    return evaluate_with(cfg, w, coeffs, objective,
                         std::vector<MappingStrategy>(all.begin(), all.end()));
}

namespace {

struct Point {
    int idx[5] = {0, 0, 0, 0, 0};
    bool operator==(const Point& o) const {
        return std::equal(idx, idx + 5, o.idx);
    }
};

const std::vector<std::int64_t>& axis(const SearchSpace& s, int p) {
    switch (p) {
        case 0: return s.mr;
        case 1: return s.mc;
        case 2: return s.scr;
        case 3: return s.is_size;
        default: return s.os_size;
    }
}

AcceleratorConfig point_config(const SearchSpace& s, const Point& p) {
    return space_config(s, s.mr[p.idx[0]], s.mc[p.idx[1]], s.scr[p.idx[2]],
                        s.is_size[p.idx[3]], s.os_size[p.idx[4]]);
}

// Deterministic preference order: objective, then area, then cycles, then
// the incumbent.
bool better(const EvalResult& a, const EvalResult& b) {
    if (a.objective_scalar != b.objective_scalar)
        return a.objective_scalar < b.objective_scalar;
    if (a.area_mm2 != b.area_mm2) return a.area_mm2 < b.area_mm2;
    return a.aggregate.cycles < b.aggregate.cycles;
}

void fill_result(ExploreResult& out, const AcceleratorConfig& cfg, const EvalResult& ev) {
    out.best_config = cfg;
    out.per_op = ev.per_op;
    out.objective_scalar = ev.objective_scalar;
    out.objective_value = ev.objective_value;
    out.energy_pj = ev.aggregate.energy_pj;
    out.gops = ev.aggregate.wall_time_us > 0.0
                   ? ev.total_ops / ev.aggregate.wall_time_us / 1000.0
                   : 0.0;
    out.area_mm2 = ev.area_mm2;
}

}  // namespace

ExploreResult anneal(const SearchSpace& space, const Workload& w,
                     const CostCoefficients& coeffs, Objective objective,
                     double area_budget_mm2, std::uint64_t seed,
                     const AnnealSchedule& schedule) {
    if (space.points() <= 0) throw ValidationError("empty search space");
    ExploreResult res;
    res.objective = objective;
    res.area_budget_mm2 = area_budget_mm2;
    res.seed = seed;
    res.schedule = schedule;
    res.prune = space.stats;

    Point min_pt;
    AcceleratorConfig min_cfg = point_config(space, min_pt);
    if (area_of(min_cfg, coeffs) > area_budget_mm2) {
        std::ostringstream os;
        os << "smallest candidate area " << area_of(min_cfg, coeffs)
           << " mm2 exceeds the budget " << area_budget_mm2 << " mm2";
        throw InfeasibleBudgetError(os.str());
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_move(0, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::unordered_map<std::uint64_t, std::optional<EvalResult>> memo;
    auto eval_point = [&](const Point& p) -> const std::optional<EvalResult>& {
        AcceleratorConfig cfg = point_config(space, p);
        std::uint64_t fp = fingerprint(cfg);
        auto it = memo.find(fp);
        if (it == memo.end()) {
            std::optional<EvalResult> ev;
            try {
                ev = evaluate(cfg, w, coeffs, objective);
            } catch (const InfeasiblePlanError&) {
                ev = std::nullopt;
            }
            ++res.evaluations;
            it = memo.emplace(fp, std::move(ev)).first;
        }
        return it->second;
    };

    Point start;
    if (space.start) {
        auto locate = [&](const std::vector<std::int64_t>& v, std::int64_t x, const char* nm) {
            auto it = std::find(v.begin(), v.end(), x);
            if (it == v.end())
                throw ValidationError(std::string("start config ") + nm +
                                      " value is not in the pruned space");
            return static_cast<int>(it - v.begin());
        };
        start.idx[0] = locate(space.mr, space.start->mr, "mr");
        start.idx[1] = locate(space.mc, space.start->mc, "mc");
        start.idx[2] = locate(space.scr, space.start->macro.scr, "scr");
        start.idx[3] = locate(space.is_size, space.start->is_size, "is_size");
        start.idx[4] = locate(space.os_size, space.start->os_size, "os_size");
        if (area_of(point_config(space, start), coeffs) > area_budget_mm2) start = min_pt;
    }

    // A plan-infeasible start falls back to bounded random probing.
    const std::optional<EvalResult>* start_ev = &eval_point(start);
    for (int attempt = 0; attempt < 128 && !start_ev->has_value(); ++attempt) {
        Point p;
        for (int a = 0; a < 5; ++a)
            p.idx[a] = static_cast<int>(rng() % axis(space, a).size());
        if (area_of(point_config(space, p), coeffs) > area_budget_mm2) continue;
        start_ev = &eval_point(p);
        if (start_ev->has_value()) start = p;
    }
    if (!start_ev->has_value())
        throw InfeasiblePlanError("no plan-feasible candidate found under the budget");

    Point cur = start;
    double cur_scalar = (*start_ev)->objective_scalar;
    Point best_pt = start;
    EvalResult best_ev = **start_ev;
    res.history.push_back(HistoryEntry{0, point_config(space, start), cur_scalar,
                                       (*start_ev)->objective_value, true});

    double temp = schedule.t0_frac * cur_scalar;
    std::int64_t iter = 0;
    int stale_temps = 0;
    while (res.evaluations < schedule.max_evals && stale_temps < schedule.patience) {
        bool improved = false;
        for (int mv = 0; mv < schedule.moves_per_temp && res.evaluations < schedule.max_evals;
             ++mv) {
            ++iter;
            int r = pick_move(rng);
            int p = r / 2, dir = (r % 2) ? 1 : -1;
            Point cand = cur;
            int hi = static_cast<int>(axis(space, p).size()) - 1;
            cand.idx[p] = std::clamp(cand.idx[p] + dir, 0, hi);
            if (cand == cur) continue;
            AcceleratorConfig cfg = point_config(space, cand);
            if (area_of(cfg, coeffs) > area_budget_mm2) continue;
            const std::optional<EvalResult>& ev = eval_point(cand);
            if (!ev) continue;
            double delta = ev->objective_scalar - cur_scalar;
            bool accept = delta <= 0.0 ||
                          (temp > 0.0 && unit(rng) < std::exp(-delta / temp));
            res.history.push_back(HistoryEntry{iter, cfg, ev->objective_scalar,
                                               ev->objective_value, accept});
            if (accept) {
                cur = cand;
                cur_scalar = ev->objective_scalar;
            }
            if (better(*ev, best_ev)) {
                best_ev = *ev;
                best_pt = cand;
                improved = true;
            }
        }
        temp *= schedule.alpha;
        stale_temps = improved ? 0 : stale_temps + 1;
    }

    fill_result(res, point_config(space, best_pt), best_ev);
    return res;
}

ExploreResult exhaustive_best(const SearchSpace& space, const Workload& w,
                              const CostCoefficients& coeffs, Objective objective,
                              double area_budget_mm2) {
    ExploreResult res;
    res.objective = objective;
    res.area_budget_mm2 = area_budget_mm2;
    res.prune = space.stats;

    bool any_in_budget = false;
    std::optional<EvalResult> best;
    AcceleratorConfig best_cfg;
    Point p;
    for (p.idx[0] = 0; p.idx[0] < static_cast<int>(space.mr.size()); ++p.idx[0])
        for (p.idx[1] = 0; p.idx[1] < static_cast<int>(space.mc.size()); ++p.idx[1])
            for (p.idx[2] = 0; p.idx[2] < static_cast<int>(space.scr.size()); ++p.idx[2])
                for (p.idx[3] = 0; p.idx[3] < static_cast<int>(space.is_size.size());
                     ++p.idx[3])
                    for (p.idx[4] = 0; p.idx[4] < static_cast<int>(space.os_size.size());
                         ++p.idx[4]) {
                        AcceleratorConfig cfg = point_config(space, p);
                        if (area_of(cfg, coeffs) > area_budget_mm2) continue;
                        any_in_budget = true;
                        EvalResult ev;
                        try {
                            ev = evaluate(cfg, w, coeffs, objective);
                        } catch (const InfeasiblePlanError&) {
                            continue;
                        }
                        ++res.evaluations;
                        if (!best || better(ev, *best)) {
                            best = std::move(ev);
                            best_cfg = cfg;
                        }
                    }
    if (!any_in_budget)
        throw InfeasibleBudgetError("no candidate in the space fits the area budget");
    if (!best) throw InfeasiblePlanError("no plan-feasible candidate found under the budget");
    fill_result(res, best_cfg, *best);
    return res;
}

}  // namespace cimflow
