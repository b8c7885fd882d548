#include <doctest.h>

#include <random>

#include "stlift/checker.hpp"
#include "stlift/lift.hpp"
#include "stlift/parser.hpp"

using namespace stlift;

namespace {

// random well-typed expression trees for the normalization properties
sym::ExprPtr random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 6);
    switch (pick(rng)) {
    case 0:
        return sym::constant(static_cast<int64_t>(rng() % 7) - 3);
    case 1:
        return sym::symbol(std::string(1, static_cast<char>('a' + rng() % 3)));
    case 2:
        return sym::get("A", {sym::symbol("i")});
    case 3:
        return sym::add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 4:
        return sym::sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5:
        return sym::mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    default:
        return sym::neg(random_expr(rng, depth - 1));
    }
}

// lift a tiny kernel and hand back the graph + lifter for rule inspection
struct Lifted {
    std::shared_ptr<IrModule> ir;
    std::shared_ptr<InvariantGraph> graph;
    std::shared_ptr<Lifter> lifter;
    LiftOutcome outcome;
};

Lifted lift_source(const std::string& src, LiftOptions opt = {}) {
    Lifted out;
    out.ir = std::make_shared<IrModule>(lower_to_ir(parse_kernel(src)));
    out.graph = std::make_shared<InvariantGraph>(build_invariant_graph(*out.ir));
    out.lifter = std::make_shared<Lifter>(*out.graph, opt);
    out.outcome = out.lifter->run();
    return out;
}

}  // namespace

TEST_CASE("normalize folds constants, collects affine forms and is idempotent") {
    // get(A,i)+get(A,i-1+0) sorts and folds
    sym::ExprPtr a = sym::add(sym::get("A", {sym::symbol("i")}),
                              sym::get("A", {sym::add(sym::sub(sym::symbol("i"), sym::constant(1)),
                                                      sym::constant(0))}));
    CHECK(sym::expr_str(a) == "A(i) + A(i - 1)");

    // (i+1)+1 -> i+2
    sym::ExprPtr b = sym::add(sym::add(sym::symbol("i"), sym::constant(1)), sym::constant(1));
    CHECK(sym::expr_str(b) == "i + 2");

    // 1 * x -> x
    sym::ExprPtr c = sym::mul(sym::constant(1), sym::symbol("x"));
    CHECK(sym::expr_str(c) == "x");

    // commutativity is canonical
    sym::ExprPtr d1 = sym::add(sym::symbol("a"), sym::symbol("b"));
    sym::ExprPtr d2 = sym::add(sym::symbol("b"), sym::symbol("a"));
    CHECK(sym::expr_eq(d1, d2));

    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        sym::ExprPtr e = random_expr(rng, 4);
        CHECK(sym::expr_eq(sym::normalize(e), e));  // factory output is normal
        CHECK(sym::expr_eq(sym::normalize(sym::normalize(e)), sym::normalize(e)));
    }
}

TEST_CASE("division by a zero constant is rejected") {
    CHECK_THROWS_AS(sym::div(sym::symbol("i"), sym::constant(0)), Error);
}

TEST_CASE("shift_time substitutes the iteration variable and round-trips") {
    Summary s = Summary::free_array("B", 1);
    Branch b;
    b.guard = sym::conj2(sym::ge(pos_var(0), sym::constant(1)),
                         sym::le(pos_var(0), sym::symbol("t")));
    b.value = sym::get("A", {pos_var(0)});
    s.branches.push_back(b);

    Summary shifted = shift_time(s, "t", -1);
    CHECK(sym::cond_str(branch_cond(shifted.branches[0])) == "1 <= $1 .and. $1 + 1 <= t");

    Summary back = shift_time(shifted, "t", +1);
    CHECK(summary_struct_eq(back, s));

    // no occurrence of t: unchanged
    Summary constant_only = Summary::scalar(sym::get("A", {sym::symbol("j")}));
    CHECK(summary_struct_eq(shift_time(constant_only, "t", -5), constant_only));

    // nested get(A, t+1) shifted by -1 becomes get(A, t)
    Summary g = Summary::scalar(sym::get("A", {sym::add(sym::symbol("t"), sym::constant(1))}));
    CHECK(sym::expr_str(shift_time(g, "t", -1).def) == "A(t)");
}

TEST_CASE("substitute renames formals and inlines bounds") {
    Summary s = Summary::scalar(sym::add(sym::symbol("lo"), sym::get("A", {sym::symbol("lo")})));
    sym::SymSubst sub;
    sub["lo"] = sym::constant(2);
    Summary out = summary_substitute(s, sub);
    CHECK(sym::expr_str(out.def) == "A(2) + 2");
    // empty bindings: unchanged
    CHECK(summary_struct_eq(summary_substitute(s, {}), s));
}

TEST_CASE("rule 1 and rule 2: inputs become free variables, bounds ranged indices") {
    Lifted l = lift_source(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 1, N\n  B(i) = A(i)\nend do\n");
    const InvariantGraph& g = *l.graph;
    for (size_t v = 0; v < g.vertices.size(); ++v) {
        const Operation& o = g.op_of(static_cast<int>(v));
        const Summary& s = g.summaries[v];
        if (o.kind == OpKind::Input && o.dtype == DataType::Array) {
            CHECK(s.is_array());
            CHECK(sym::expr_str(s.def) == o.var + "($1)");
            CHECK(s.branches.empty());
        }
        if (o.kind == OpKind::Bound) {
            CHECK(!s.is_array());
            CHECK(sym::expr_str(s.def) == "i");
            CHECK(o.lo != nullptr);  // the range lives on the operation
        }
    }
}

TEST_CASE("rule 3: scalar operands combine under the operator") {
    // via a kernel: B(i) = A(i) + 1.5 keeps the scalar op vertex
    Lifted l = lift_source(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 1, N\n  s = A(i)\n  B(i) = s + 1.5\nend do\n");
    const InvariantGraph& g = *l.graph;
    bool found = false;
    for (size_t v = 0; v < g.vertices.size(); ++v) {
        const Operation& o = g.op_of(static_cast<int>(v));
        if (o.kind != OpKind::Scalar) continue;
        found = true;
        CHECK(sym::expr_str(g.summaries[v].def) == "A(i) + 1.5");
    }
    CHECK(found);
}

TEST_CASE("rule 5: set produces an image with one overridden position") {
    Lifted l = lift_source(
        "param N : int\nparam M : int\narray A : float(N, M)\narray B : float(N, M)\n"
        "do j = 2, M\n  do i = 2, N\n    B(i, j) = A(i, j) + A(i - 1, j - 1)\n  end do\nend do\n");
    const InvariantGraph& g = *l.graph;
    for (size_t v = 0; v < g.vertices.size(); ++v) {
        const Operation& o = g.op_of(static_cast<int>(v));
        if (o.kind != OpKind::Set) continue;
        const Summary& s = g.summaries[v];
        REQUIRE(s.is_array());
        REQUIRE(!s.branches.empty());
        const Branch& fresh = s.branches.front();
        REQUIRE(fresh.write.has_value());
        CHECK(fresh.write->kind == WriteMeta::Kind::Point);
        CHECK(sym::expr_str(fresh.write->pos[0]) == "i");
        CHECK(sym::expr_str(fresh.write->pos[1]) == "j");
        CHECK(sym::expr_str(fresh.value) == "r1.A(i, j) + r1.A(i - 1, j - 1)");
    }
}

TEST_CASE("rule 6 preserves pairwise exclusivity of branch conditions") {
    Lifted l = lift_source(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 2, N - 1\n"
        "  if (i == 2) then\n    B(i) = A(i) + A(i + 1)\n"
        "  else if (i == N - 1) then\n    B(i) = A(i - 1) + A(i)\n"
        "  else\n    B(i) = A(i - 1) + A(i) + A(i + 1)\n  end if\nend do\n");
    const Summary& post = l.outcome.post;
    REQUIRE(post.branches.size() >= 2);
    CheckerConfig cfg;
    for (size_t i = 0; i < post.branches.size(); ++i)
        for (size_t j = i + 1; j < post.branches.size(); ++j) {
            CondPtr both = sym::conj2(branch_cond(post.branches[i]), branch_cond(post.branches[j]));
            // provably unsatisfiable or at least never satisfied on the window
            EqualityVerdict v = prove_equal(both, sym::cfalse(), cfg);
            CHECK(v.status == EqualityVerdict::Status::Equal);
        }
}

TEST_CASE("self-consistency: re-applying rules reproduces every summary") {
    const char* sources[] = {
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 2, N - 1\n  B(i) = A(i - 1) + A(i) + A(i + 1)\nend do\n",
        "param N : int\nparam M : int\narray A : float(N, M)\narray B : float(N, M)\n"
        "do j = 2, M\n  do i = 2, N\n    B(i, j) = A(i, j) + A(i - 1, j - 1)\n  end do\nend do\n",
    };
    for (const char* src : sources) {
        Lifted l = lift_source(src);
        std::string why;
        bool ok = l.lifter->recheck_self_consistency(&why);
        INFO(why);
        CHECK(ok);
    }
}

TEST_CASE("generalize rewrites the inner write into region form") {
    // E1 = get(A,i,j)+get(A,i-1,j-1) written at (i, j): region 2 <= x1 <= i, x2 = j
    Lifted l = lift_source(
        "param N : int\nparam M : int\narray A : float(N, M)\narray B : float(N, M)\n"
        "do j = 2, M\n  do i = 2, N\n    B(i, j) = A(i, j) + A(i - 1, j - 1)\n  end do\nend do\n");
    // inner region post (memoized) carries the formal names
    const auto& posts = l.lifter->region_posts();
    int inner_region = -1;
    for (const auto& r : l.ir->regions)
        if (r.level == 1) inner_region = r.id;
    REQUIRE(posts.count(inner_region));
    const Summary& inner = posts.at(inner_region);
    REQUIRE(inner.branches.size() == 1);
    const Branch& br = inner.branches[0];
    REQUIRE(br.write.has_value());
    REQUIRE(br.write->kind == WriteMeta::Kind::Region);
    CHECK(sym::expr_str(br.write->dims[0].lb) == "2");
    CHECK(sym::expr_str(br.write->dims[0].ub) == "N");  // instantiated at the last iteration
    CHECK(sym::expr_str(br.write->dims[1].lb) == "j");
    CHECK(sym::expr_str(br.write->dims[1].ub) == "j");
    CHECK(render_positions(sym::expr_str(br.value)) == "r1.A(x1, x2) + r1.A(x1 - 1, x2 - 1)");
}

TEST_CASE("generalize: pass-through branches and 1d last-writer bounds") {
    // 1d kernel writing B[t] for t in [1, 6]: region 1 <= x <= t before
    // instantiation, 1 <= x <= 6 after; compare against the enumerated
    // last-writer map
    Lifted l = lift_source("array A : float(8)\narray B : float(8)\n"
                           "do i = 1, 6\n  B(i) = A(i)\nend do\n");
    const Summary& post = l.outcome.post;
    REQUIRE(post.branches.size() == 1);
    // enumerate writes: position x is last written by iteration x
    for (int64_t x = 1; x <= 6; ++x) {
        sym::SymSubst at;
        at[pos_var_name(0)] = sym::constant(x);
        CondPtr c = sym::cond_substitute(branch_cond(post.branches[0]), at);
        CHECK(c->kind == sym::CondKind::True);
    }
    sym::SymSubst at7;
    at7[pos_var_name(0)] = sym::constant(7);
    CHECK(sym::cond_substitute(branch_cond(post.branches[0]), at7)->kind == sym::CondKind::False);
}

TEST_CASE("non-affine write positions are rejected during generalization") {
    // B(i % 3 + 1) is not affine in i
    CHECK_THROWS_AS(lift_source("array B : float(8)\n"
                                "do i = 1, 6\n  B(i % 3 + 1) = 1.0\nend do\n"),
                    Error);
}
