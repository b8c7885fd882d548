#include <doctest.h>

#include "stlift/frontend.hpp"
#include "stlift/parser.hpp"

using namespace stlift;

namespace {

const char* kDiag2p = R"(param N : int
param M : int
array A : float(N, M)
array B : float(N, M)
do j = 2, M
  do i = 2, N
    B(i, j) = A(i, j) + A(i - 1, j - 1)
  end do
end do
)";

}  // namespace

TEST_CASE("two-level kernel parses with the expected structure") {
    ast::KernelAst k = parse_kernel(kDiag2p, "diag_2d2p");
    CHECK(k.depth() == 2);
    CHECK(k.arrays.size() == 2);
    CHECK(k.params.size() == 2);
    REQUIRE(k.top->body.size() == 1);
    auto* inner = std::get_if<ast::LoopPtr>(&k.top->body[0]->node);
    REQUIRE(inner);
    REQUIRE((*inner)->body.size() == 1);
    auto* assign = std::get_if<ast::Assign>(&(*inner)->body[0]->node);
    REQUIRE(assign);
    CHECK(ast::expr_text(assign->lhs) == "B(i, j)");
    CHECK(ast::expr_text(assign->rhs) == "A(i, j) + A(i - 1, j - 1)");
}

TEST_CASE("single loop with empty body parses") {
    ast::KernelAst k = parse_kernel("param N : int\ndo i = 1, N\nend do\n");
    CHECK(k.depth() == 1);
    CHECK(k.top->body.empty());
}

TEST_CASE("missing end do is a syntax error at end of file") {
    try {
        parse_kernel("param N : int\ndo i = 1, N\n");
        FAIL("expected SyntaxError");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::SyntaxError);
        CHECK(std::string(e.what()).find("end do") != std::string::npos);
    }
}

TEST_CASE("undeclared identifiers and unsupported constructs are rejected") {
    CHECK_THROWS_WITH_AS(parse_kernel("do i = 1, N\n  B(i) = 1.0\nend do\n"), doctest::Contains("N"),
                         Error);
    try {
        parse_kernel("param N : int\narray B : float(N)\ndo while (1 < 2)\n  B(1) = 0.0\nend do\n");
        FAIL("expected UnsupportedConstruct");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::UnsupportedConstruct);
    }
    // non-affine subscript: product of two loop indices
    try {
        parse_kernel("param N : int\narray B : float(N)\n"
                     "do j = 1, N\n  do i = 1, N\n    B(i * j) = 0.0\n  end do\nend do\n");
        FAIL("expected UnsupportedConstruct");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::UnsupportedConstruct);
        CHECK(std::string(e.what()).find("non-affine") != std::string::npos);
    }
}

TEST_CASE("position variable names are reserved") {
    CHECK_THROWS_AS(parse_kernel("param x1 : int\narray B : float(x1)\ndo i = 1, x1\n  B(i) = 0.0\nend do\n"),
                    Error);
}

TEST_CASE("pretty-printed kernels re-parse to a structurally identical ast") {
    const char* sources[] = {
        kDiag2p,
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 2, N - 1\n"
        "  if (i == 2) then\n    B(i) = A(i) + A(i + 1)\n"
        "  else\n    B(i) = A(i - 1) + A(i) + A(i + 1)\n  end if\nend do\n",
        "array A : float(16)\narray B : float(16)\n"
        "do i = 2, 13, 3\n  B(i) = 0.5 * A(i)\n  B(i + 1) = 0.25 * A(i + 1)\n  B(i + 2) = A(i + 2)\nend do\n",
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "!$omp parallel do\ndo i = 1, N\n  B(i) = A(i)\nend do\n",
    };
    for (const char* src : sources) {
        ast::KernelAst k = parse_kernel(src);
        ast::KernelAst again = parse_kernel(ast::kernel_text(k));
        CHECK(ast::kernel_equal(k, again));
    }
}

TEST_CASE("strip_directives removes annotations everywhere and is idempotent") {
    const char* src =
        "param N : int\narray A : float(N, N)\narray B : float(N, N)\n"
        "!$omp parallel do\n"
        "do j = 1, N\n"
        "  !$omp simd\n"
        "  do i = 1, N\n    B(i, j) = A(i, j)\n  end do\nend do\n";
    ast::KernelAst k = parse_kernel(src);
    CHECK(k.top->directives.size() == 1);
    ast::KernelAst stripped = strip_directives(k);
    CHECK(stripped.top->directives.empty());
    auto* inner = std::get_if<ast::LoopPtr>(&stripped.top->body[0]->node);
    REQUIRE(inner);
    CHECK((*inner)->directives.empty());
    // semantics untouched: only directives differ
    ast::KernelAst no_directives = parse_kernel(
        "param N : int\narray A : float(N, N)\narray B : float(N, N)\n"
        "do j = 1, N\n  do i = 1, N\n    B(i, j) = A(i, j)\n  end do\nend do\n");
    CHECK(ast::kernel_equal(stripped, no_directives));
    // idempotent
    CHECK(ast::kernel_equal(strip_directives(stripped), stripped));
}

TEST_CASE("directive on the inner loop only is removed locally") {
    const char* src =
        "param N : int\narray A : float(N, N)\narray B : float(N, N)\n"
        "do j = 1, N\n"
        "  !$omp simd\n"
        "  do i = 1, N\n    B(i, j) = A(i, j)\n  end do\nend do\n";
    ast::KernelAst k = parse_kernel(src);
    auto* inner = std::get_if<ast::LoopPtr>(&k.top->body[0]->node);
    REQUIRE(inner);
    CHECK((*inner)->directives.size() == 1);
    ast::KernelAst stripped = strip_directives(k);
    CHECK(ast::kernel_equal(k.top->body.size() == 1 ? k : k, k));  // original untouched
    auto* sinner = std::get_if<ast::LoopPtr>(&stripped.top->body[0]->node);
    CHECK((*sinner)->directives.empty());
}

TEST_CASE("regularity: plain nest is regular with no atypical iterations") {
    RegularityReport rep = analyze_regularity(parse_kernel(kDiag2p));
    REQUIRE(rep.levels.size() == 2);
    for (const auto& l : rep.levels) {
        CHECK(l.verdict == Regularity::Regular);
        CHECK(l.atypical_iterations == 0);
        CHECK(l.deviating_statements == 0);
    }
    CHECK(rep.regular());
}

TEST_CASE("regularity: boundary equality guards stay regular with r > 0") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 1, N\n"
        "  if (i == 1) then\n    B(i) = 0.0\n  else\n    B(i) = A(i)\n  end if\nend do\n");
    RegularityReport rep = analyze_regularity(k);
    REQUIRE(rep.levels.size() == 1);
    CHECK(rep.levels[0].verdict == Regularity::Regular);
    CHECK(rep.levels[0].atypical_iterations > 0);
    CHECK(rep.levels[0].deviating_statements > 0);
    CHECK(!rep.levels[0].offending.empty());  // deviating statement spans listed
}

TEST_CASE("regularity: data-dependent dispatch is irregular") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 1, N\n"
        "  if (A(i) > 0.5) then\n    B(i) = 1.0\n  else\n    B(i) = 0.0\n  end if\nend do\n");
    RegularityReport rep = analyze_regularity(k);
    CHECK(!rep.regular());
    CHECK(rep.first_irregular() != nullptr);
    CHECK(rep.first_irregular()->level == 1);
}

TEST_CASE("regularity verdict is deterministic") {
    ast::KernelAst k = parse_kernel(kDiag2p);
    RegularityReport a = analyze_regularity(k);
    RegularityReport b = analyze_regularity(k);
    REQUIRE(a.levels.size() == b.levels.size());
    for (size_t i = 0; i < a.levels.size(); ++i) {
        CHECK(a.levels[i].verdict == b.levels[i].verdict);
        CHECK(a.levels[i].atypical_iterations == b.levels[i].atypical_iterations);
        CHECK(a.levels[i].common_statements == b.levels[i].common_statements);
    }
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_kernel("param N : int\narray A : float(N)\ndo i = 1 N\nend do\n");
        FAIL("expected SyntaxError");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::SyntaxError);
        CHECK(e.span.begin.line == 3);
        CHECK(std::string(e.what()).find("expected") != std::string::npos);
    }
}
