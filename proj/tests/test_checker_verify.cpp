#include <doctest.h>

#include "stlift/checker.hpp"
#include "stlift/pipeline.hpp"
#include "support/summary_text.hpp"

using namespace stlift;

TEST_CASE("prove_equal: commutativity is structural equality") {
    sym::ExprPtr i = sym::symbol("i");
    sym::ExprPtr a = sym::add(sym::get("A", {i}), sym::get("A", {sym::add(i, sym::constant(1))}));
    sym::ExprPtr b = sym::add(sym::get("A", {sym::add(i, sym::constant(1))}), sym::get("A", {i}));
    EqualityVerdict v = prove_equal(a, b);
    CHECK(v.status == EqualityVerdict::Status::Equal);
}

TEST_CASE("prove_equal: i+1 vs i+2 is NotEqual with a witness") {
    sym::ExprPtr i = sym::symbol("i");
    EqualityVerdict v = prove_equal(sym::add(i, sym::constant(1)), sym::add(i, sym::constant(2)));
    REQUIRE(v.status == EqualityVerdict::Status::NotEqual);
    CHECK(v.witness.find("i=") != std::string::npos);
}

TEST_CASE("prove_equal: unit index shift matches the unrolled sibling expression") {
    // E1 = A(i-1)+A(i)+A(i+1); E1 with i -> i+1 equals E2 = A(i)+A(i+1)+A(i+2)
    sym::ExprPtr i = sym::symbol("i");
    auto at = [&](int64_t d) { return sym::get("A", {sym::add(i, sym::constant(d))}); };
    sym::ExprPtr e1_shifted = sym::add(sym::add(at(0), at(1)), at(2));
    sym::ExprPtr e2 = sym::add(sym::add(at(2), at(0)), at(1));
    CHECK(prove_equal(e1_shifted, e2).status == EqualityVerdict::Status::Equal);
}

TEST_CASE("prove_equal is reflexive, symmetric and deterministic") {
    sym::ExprPtr i = sym::symbol("i");
    sym::ExprPtr a = sym::mul(sym::get("A", {i}), sym::constant(2));
    sym::ExprPtr b = sym::add(sym::get("A", {i}), sym::get("A", {i}));
    CHECK(prove_equal(a, a).status == EqualityVerdict::Status::Equal);
    EqualityVerdict v1 = prove_equal(a, b);
    EqualityVerdict v2 = prove_equal(b, a);
    CHECK(v1.status == v2.status);  // 2*A(i) == A(i)+A(i) via normalization
    CHECK(v1.status == EqualityVerdict::Status::Equal);
    for (int k = 0; k < 3; ++k)
        CHECK(prove_equal(a, b).status == v1.status);
}

TEST_CASE("prove_equal on conditions and summaries") {
    sym::ExprPtr x = sym::symbol("x");
    CondPtr c1 = sym::conj2(sym::ge(x, sym::constant(2)), sym::le(x, sym::constant(5)));
    CondPtr c2 = sym::conj2(sym::le(x, sym::constant(5)), sym::ge(x, sym::constant(2)));
    CHECK(prove_equal(c1, c2).status == EqualityVerdict::Status::Equal);
    CondPtr c3 = sym::conj2(sym::ge(x, sym::constant(3)), sym::le(x, sym::constant(5)));
    CHECK(prove_equal(c1, c3).status == EqualityVerdict::Status::NotEqual);

    Summary s1 = testsupport::parse_summary_text(
        "B(x1):\n  2 <= x1 .and. x1 <= N -> A(x1) + A(x1 - 1)\n  otherwise -> B0(x1)\n");
    Summary s2 = testsupport::parse_summary_text(
        "B(x1):\n  x1 <= N .and. x1 >= 2 -> A(x1 - 1) + A(x1)\n  otherwise -> B0(x1)\n");
    CHECK(prove_equal(s1, s2).status == EqualityVerdict::Status::Equal);
    // piecewise split of the same function is still equal
    Summary s3 = testsupport::parse_summary_text(
        "B(x1):\n"
        "  x1 == 2 .and. x1 <= N -> A(2) + A(1)\n"
        "  3 <= x1 .and. x1 <= N -> A(x1) + A(x1 - 1)\n"
        "  otherwise -> B0(x1)\n");
    CHECK(prove_equal(s1, s3).status == EqualityVerdict::Status::Equal);
    // corrupted interior
    Summary s4 = testsupport::parse_summary_text(
        "B(x1):\n  2 <= x1 .and. x1 <= N -> A(x1) + A(x1 + 1)\n  otherwise -> B0(x1)\n");
    CHECK(prove_equal(s1, s4).status == EqualityVerdict::Status::NotEqual);
}

TEST_CASE("too many free index variables raise DomainTooLarge") {
    sym::ExprPtr e1 = sym::constant(0);
    sym::ExprPtr e2 = sym::constant(0);
    for (int k = 0; k < 8; ++k) {
        e1 = sym::add(e1, sym::symbol("v" + std::to_string(k)));
        e2 = sym::add(e2, sym::symbol("v" + std::to_string(k)));
    }
    e2 = sym::add(e2, sym::get("A", {sym::symbol("v0")}));  // defeat structural equality
    e1 = sym::add(e1, sym::get("A", {sym::symbol("v1")}));
    CHECK_THROWS_AS(prove_equal(e1, e2), Error);
}

TEST_CASE("verify_against_oracle: the diagonal kernel passes with zero absolute error") {
    PipelineOptions opt;
    opt.verify = VerifyConfig{50, {8, 8}, 7, 1e-12};
    PipelineResult res = run_pipeline(read_file(std::string(STLIFT_KERNEL_DIR) + "/diag_2d2p.st"),
                                      "diag_2d2p", opt);
    REQUIRE(res.verify.has_value());
    CHECK(res.verify->pass());
    CHECK(res.verify->max_abs_error == 0.0);  // identical op order for the two-term sum
    CHECK(res.verify->mismatch_count == 0);
}

TEST_CASE("verify_against_oracle: identity copy and corrupted postconditions") {
    std::string src = "param N : int\narray A : float(N)\narray B : float(N)\n"
                      "do i = 1, N\n  B(i) = A(i)\nend do\n";
    PipelineOptions opt;
    opt.verify = VerifyConfig{10, {8}, 3, 1e-12};
    PipelineResult res = run_pipeline(src, "copy", opt);
    CHECK(res.verify->pass());

    // corrupt the postcondition: x1 - 0 becomes x1 + 1 in the branch value
    Summary bad = res.lift.post;
    REQUIRE(!bad.branches.empty());
    bad.branches[0].value = sym::get("A", {sym::add(pos_var(0), sym::constant(1))});
    // positions near the edge would read out of bounds; shrink the region to
    // keep the control honest about a localized interior mismatch
    VerificationReport rep = verify_against_oracle(
        res.kernel, *res.ir,
        [&] {
            Summary s = bad;
            s.branches[0].guard = sym::conj2(s.branches[0].guard,
                                             sym::le(pos_var(0), sym::symbol("N")));
            s.branches[0].write->dims[0].ub = sym::sub(sym::symbol("N"), sym::constant(1));
            return s;
        }(),
        VerifyConfig{5, {8}, 3, 1e-12});
    CHECK(!rep.pass());
    REQUIRE(rep.first_mismatch.has_value());
    CHECK(rep.first_mismatch->array == "B");
    CHECK(rep.first_mismatch->position[0] >= 1);
    CHECK(rep.first_mismatch->position[0] < 8);
}

TEST_CASE("shape with fewer entries than int params is a ShapeMismatch") {
    std::string src = "param N : int\nparam M : int\narray A : float(N, M)\narray B : float(N, M)\n"
                      "do j = 1, M\n  do i = 1, N\n    B(i, j) = A(i, j)\n  end do\nend do\n";
    PipelineOptions opt;
    opt.verify = VerifyConfig{2, {8}, 1, 1e-12};
    CHECK_THROWS_AS(run_pipeline(src, "k", opt), Error);
}

TEST_CASE("checker equality implies oracle agreement for postconditions") {
    // the boundary kernel's lifted postcondition and a hand-stated equivalent
    std::string src = read_file(std::string(STLIFT_KERNEL_DIR) + "/blur_1d3p.st");
    PipelineOptions opt;
    PipelineResult res = run_pipeline(src, "blur", opt);
    Summary stated = testsupport::parse_summary_text(
        "B(x1):\n  2 <= x1 .and. x1 <= N - 1 -> A(x1 - 1) + A(x1) + A(x1 + 1)\n"
        "  otherwise -> B0(x1)\n");
    REQUIRE(prove_equal(res.lift.post, stated).status == EqualityVerdict::Status::Equal);
    VerifyConfig cfg{20, {10}, 11, 1e-12};
    VerificationReport r1 = verify_against_oracle(res.kernel, *res.ir, res.lift.post, cfg);
    VerificationReport r2 = verify_against_oracle(res.kernel, *res.ir, stated, cfg);
    CHECK(r1.pass());
    CHECK(r2.pass());
}
