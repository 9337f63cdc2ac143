#include <doctest.h>

#include "cimflow/common.hpp"
#include "cimflow/workload.hpp"

using namespace cimflow;

TEST_CASE("gemm ops parse with defaulted widths and psum growth") {
    Workload w = parse_workload(R"({
        "name": "t",
        "ops": [{"id": "a", "type": "gemm", "m": 16, "k": 64, "n": 8}]
    })");
    REQUIRE(w.ops.size() == 1);
    const GemmOp& op = w.ops[0];
    CHECK(op.id == "a");
    CHECK(op.m == 16);
    CHECK(op.k == 64);
    CHECK(op.n == 8);
    CHECK(op.dw_in == 8);
    CHECK(op.dw_w == 8);
    CHECK(op.dw_out == 8);
    // 8 + 8 + ceil(log2(64)) = 22, already >= dw_out and <= 32
    CHECK(op.dw_psum == 22);
    CHECK(op.multiplicity == 1);
    CHECK(op.macs() == 16 * 64 * 8);
}

TEST_CASE("psum default clamps to 32 and rises to dw_out") {
    Workload big = parse_workload(R"({
        "name": "t",
        "ops": [{"type": "gemm", "m": 1, "k": 1048576, "n": 1}]
    })");
    CHECK(big.ops[0].dw_psum == 32);

    Workload wide = parse_workload(R"({
        "name": "t",
        "ops": [{"type": "gemm", "m": 1, "k": 2, "n": 1,
                 "widths": {"in": 2, "w": 2, "out": 32}}]
    })");
    CHECK(wide.ops[0].dw_psum == 32);

    Workload pinned = parse_workload(R"({
        "name": "t",
        "ops": [{"type": "gemm", "m": 1, "k": 2, "n": 1, "widths": {"psum": 19}}]
    })");
    CHECK(pinned.ops[0].dw_psum == 19);
}

TEST_CASE("conv entries lower through im2col") {
    Workload w = parse_workload(R"({
        "name": "t",
        "ops": [{"id": "c", "type": "conv", "batch": 2, "h_out": 4, "w_out": 5,
                 "c_in": 3, "k_h": 3, "k_w": 3, "c_out": 8, "repeat": 6}]
    })");
    const GemmOp& op = w.ops[0];
    CHECK(op.m == 2 * 4 * 5);
    CHECK(op.k == 3 * 3 * 3);
    CHECK(op.n == 8);
    CHECK(op.multiplicity == 6);
}

TEST_CASE("unknown and malformed fields are rejected") {
    CHECK_THROWS_AS(parse_workload(R"({"name": "t", "ops": [], "extra": 1})"), ParseError);
    CHECK_THROWS_AS(parse_workload(R"({"name": "t",
        "ops": [{"type": "gemm", "m": 4, "k": 4, "n": 4, "stride": 2}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_workload(R"({"name": "t",
        "ops": [{"type": "pool", "m": 4, "k": 4, "n": 4}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_workload(R"({"name": "t",
        "ops": [{"type": "gemm", "m": 0, "k": 4, "n": 4}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_workload(R"({"name": "t",
        "ops": [{"type": "gemm", "m": 4, "k": 4, "n": 4, "widths": {"in": 65}}]})"),
                    ValidationError);
}

TEST_CASE("merge_operators folds identical shapes and keeps order") {
    Workload w = parse_workload(R"({
        "name": "t",
        "ops": [
            {"id": "x0", "type": "gemm", "m": 8, "k": 8, "n": 8, "repeat": 2},
            {"id": "y",  "type": "gemm", "m": 8, "k": 16, "n": 8},
            {"id": "x1", "type": "gemm", "m": 8, "k": 8, "n": 8, "repeat": 3},
            {"id": "z",  "type": "gemm", "m": 8, "k": 8, "n": 8,
             "widths": {"in": 4, "w": 4, "out": 8}}
        ]
    })");
    Workload m = merge_operators(w);
    REQUIRE(m.ops.size() == 3);
    CHECK(m.ops[0].id == "x0");
    CHECK(m.ops[0].multiplicity == 5);
    CHECK(m.ops[1].id == "y");
    CHECK(m.ops[2].id == "z");  // same dims, different widths: not merged
    CHECK(m.total_macs() == w.total_macs());
}
