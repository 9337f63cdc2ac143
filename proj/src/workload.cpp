#include "cimflow/workload.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

namespace cimflow {

namespace {

using nlohmann::json;

constexpr int kPsumMaxBits = 32;

void reject_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ParseError("unknown field '" + it.key() + "' in " + where);
    }
}

std::int64_t get_dim(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError("missing field '" + key + "' in " + where);
    if (!obj[key].is_number_integer())
        throw ParseError("field '" + key + "' in " + where + " must be an integer");
    std::int64_t v = obj[key].get<std::int64_t>();
    if (v <= 0)
        throw ValidationError("field '" + key + "' in " + where + " must be positive");
    return v;
}

int get_width(const json& widths, const std::string& key, int fallback,
              const std::string& where) {
    if (!widths.contains(key)) return fallback;
    if (!widths[key].is_number_integer())
        throw ParseError("width '" + key + "' in " + where + " must be an integer");
    int v = widths[key].get<int>();
    if (v < 1 || v > 64)
        throw ValidationError("width '" + key + "' in " + where + " must be in [1, 64]");
    return v;
}

int default_psum_width(int dw_in, int dw_w, std::int64_t k, int dw_out) {
    // Lossless accumulation width, capped, but never narrower than the output.
    int grown = dw_in + dw_w + static_cast<int>(ceil_log2(k));
    return std::max(std::min(grown, kPsumMaxBits), dw_out);
}

GemmOp parse_op(const json& jop, std::size_t index) {
    const std::string where = "ops[" + std::to_string(index) + "]";
    if (!jop.is_object()) throw ParseError(where + " must be an object");
    if (!jop.contains("type") || !jop["type"].is_string())
        throw ParseError("missing string field 'type' in " + where);
    const std::string type = jop["type"].get<std::string>();

    GemmOp op;
    op.id = jop.contains("id") && jop["id"].is_string() ? jop["id"].get<std::string>()
                                                        : "op" + std::to_string(index);

    if (type == "gemm") {
        reject_unknown_fields(jop, {"id", "type", "m", "k", "n", "repeat", "widths"}, where);
        op.m = get_dim(jop, "m", where);
        op.k = get_dim(jop, "k", where);
        op.n = get_dim(jop, "n", where);
    } else if (type == "conv") {
        reject_unknown_fields(jop,
                              {"id", "type", "batch", "h_out", "w_out", "c_in", "k_h",
                               "k_w", "c_out", "repeat", "widths"},
                              where);
        std::int64_t batch = jop.contains("batch") ? get_dim(jop, "batch", where) : 1;
        op.m = batch * get_dim(jop, "h_out", where) * get_dim(jop, "w_out", where);
        op.k = get_dim(jop, "c_in", where) * get_dim(jop, "k_h", where) *
               get_dim(jop, "k_w", where);
        op.n = get_dim(jop, "c_out", where);
    } else {
        throw ParseError("unknown op type '" + type + "' in " + where);
    }

    if (jop.contains("repeat")) op.multiplicity = get_dim(jop, "repeat", where);

    json widths = json::object();
    if (jop.contains("widths")) {
        widths = jop["widths"];
        if (!widths.is_object()) throw ParseError("'widths' in " + where + " must be an object");
        reject_unknown_fields(widths, {"in", "w", "out", "psum"}, where + ".widths");
    }
    op.dw_in = get_width(widths, "in", 8, where);
    op.dw_w = get_width(widths, "w", 8, where);
    op.dw_out = get_width(widths, "out", 8, where);
    op.dw_psum = get_width(widths, "psum",
                           default_psum_width(op.dw_in, op.dw_w, op.k, op.dw_out), where);
    return op;
}

}  // namespace

void validate_op(const GemmOp& op) {
    if (op.id.empty()) throw ValidationError("op id must not be empty");
    if (op.m <= 0 || op.k <= 0 || op.n <= 0)
        throw ValidationError("op '" + op.id + "': dimensions must be positive");
    if (op.dw_in < 1 || op.dw_in > 64 || op.dw_w < 1 || op.dw_w > 64 || op.dw_out < 1 ||
        op.dw_out > 64)
        throw ValidationError("op '" + op.id + "': element widths must be in [1, 64]");
    if (op.dw_psum < op.dw_out || op.dw_psum > 64)
        throw ValidationError("op '" + op.id + "': dw_psum must be in [dw_out, 64]");
    if (op.multiplicity <= 0)
        throw ValidationError("op '" + op.id + "': multiplicity must be positive");
}

void validate_workload(const Workload& w) {
    if (w.ops.empty()) throw ValidationError("workload '" + w.name + "' has no ops");
    std::set<std::string> ids;
    for (const auto& op : w.ops) {
        validate_op(op);
        if (!ids.insert(op.id).second)
            throw ValidationError("duplicate op id '" + op.id + "'");
    }
}

Workload parse_workload(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("workload JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("workload document must be an object");
    reject_unknown_fields(doc, {"name", "ops"}, "workload");

    Workload w;
    w.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>()
                                                             : "unnamed";
    if (!doc.contains("ops") || !doc["ops"].is_array())
        throw ParseError("workload must contain an 'ops' array");
    std::size_t index = 0;
    for (const auto& jop : doc["ops"]) w.ops.push_back(parse_op(jop, index++));

    validate_workload(w);
    return w;
}

Workload merge_operators(const Workload& w) {
    using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t, int, int, int, int>;
    Workload out;
    out.name = w.name;
    std::map<Key, std::size_t> seen;
    for (const auto& op : w.ops) {
        Key key{op.m, op.k, op.n, op.dw_in, op.dw_w, op.dw_out, op.dw_psum};
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(key, out.ops.size());
            out.ops.push_back(op);
        } else {
            out.ops[it->second].multiplicity += op.multiplicity;
        }
    }
    return out;
}

}  // namespace cimflow
