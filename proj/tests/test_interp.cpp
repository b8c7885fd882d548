#include <doctest.h>

#include "stlift/interp.hpp"
#include "stlift/parser.hpp"

using namespace stlift;

namespace {

KernelInputs ones_inputs(int64_t n, int64_t m) {
    KernelInputs in;
    in.int_params = {{"N", n}, {"M", m}};
    Tensor a = Tensor::zeros(ast::ElemKind::Float, {n, m});
    for (auto& v : a.fdata) v = 1.0;
    in.arrays["A"] = a;
    in.arrays["B"] = Tensor::zeros(ast::ElemKind::Float, {n, m});
    return in;
}

}  // namespace

TEST_CASE("diagonal 2d-2p kernel over all-ones input doubles the interior") {
    ast::KernelAst k = parse_kernel(R"(param N : int
param M : int
array A : float(N, M)
array B : float(N, M)
do j = 2, M
  do i = 2, N
    B(i, j) = A(i, j) + A(i - 1, j - 1)
  end do
end do
)");
    auto out = interpret_kernel(k, ones_inputs(4, 4));
    const Tensor& b = out.at("B");
    for (int64_t i = 1; i <= 4; ++i)
        for (int64_t j = 1; j <= 4; ++j) {
            double expect = (i >= 2 && j >= 2) ? 2.0 : 0.0;
            CHECK(b.fget({i, j}) == expect);
        }
}

TEST_CASE("empty body returns inputs unchanged") {
    ast::KernelAst k = parse_kernel("param N : int\narray A : float(N)\ndo i = 1, N\nend do\n");
    KernelInputs in;
    in.int_params["N"] = 5;
    Tensor a = Tensor::zeros(ast::ElemKind::Float, {5});
    for (int64_t i = 0; i < 5; ++i) a.fdata[static_cast<size_t>(i)] = 0.5 * static_cast<double>(i);
    in.arrays["A"] = a;
    auto out = interpret_kernel(k, in);
    CHECK(out.at("A").fdata == a.fdata);
}

TEST_CASE("subscript past the extent raises OutOfBounds") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 1, N\n  B(i) = A(i + 1)\nend do\n");
    KernelInputs in;
    in.int_params["N"] = 4;
    in.arrays["A"] = Tensor::zeros(ast::ElemKind::Float, {4});
    in.arrays["B"] = Tensor::zeros(ast::ElemKind::Float, {4});
    try {
        interpret_kernel(k, in);
        FAIL("expected OutOfBounds");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::OutOfBounds);
        CHECK(std::string(e.what()).find("5") != std::string::npos);
    }
}

TEST_CASE("missing inputs are reported") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : float(N)\narray B : float(N)\ndo i = 1, N\n  B(i) = A(i)\nend do\n");
    KernelInputs in;
    in.int_params["N"] = 4;
    in.arrays["A"] = Tensor::zeros(ast::ElemKind::Float, {4});
    try {
        interpret_kernel(k, in);
        FAIL("expected MissingInput");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::MissingInput);
    }
}

TEST_CASE("integer kernels evaluate exactly, conditionals dispatch") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : int(N)\narray B : int(N)\n"
        "do i = 1, N\n"
        "  if (i == 1) then\n    B(i) = 7\n  else\n    B(i) = A(i) * 2 + A(i - 1)\n  end if\n"
        "end do\n");
    KernelInputs in;
    in.int_params["N"] = 4;
    Tensor a = Tensor::zeros(ast::ElemKind::Int, {4});
    a.idata = {1, 2, 3, 4};
    in.arrays["A"] = a;
    in.arrays["B"] = Tensor::zeros(ast::ElemKind::Int, {4});
    auto out = interpret_kernel(k, in);
    CHECK(out.at("B").idata == std::vector<int64_t>{7, 5, 8, 11});
}

TEST_CASE("scalar temporaries thread through statements") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray A : float(N)\narray B : float(N)\n"
        "do i = 2, N\n  s = A(i) + A(i - 1)\n  B(i) = s * 0.5\nend do\n");
    KernelInputs in;
    in.int_params["N"] = 3;
    Tensor a = Tensor::zeros(ast::ElemKind::Float, {3});
    a.fdata = {2.0, 4.0, 6.0};
    in.arrays["A"] = a;
    in.arrays["B"] = Tensor::zeros(ast::ElemKind::Float, {3});
    auto out = interpret_kernel(k, in);
    CHECK(out.at("B").fdata[1] == 3.0);
    CHECK(out.at("B").fdata[2] == 5.0);
}

TEST_CASE("negative steps iterate downward") {
    ast::KernelAst k = parse_kernel(
        "param N : int\narray B : int(N)\n"
        "do i = 4, 1, -1\n  B(i) = 10 - i\nend do\n");
    KernelInputs in;
    in.int_params["N"] = 4;
    in.arrays["B"] = Tensor::zeros(ast::ElemKind::Int, {4});
    auto out = interpret_kernel(k, in);
    CHECK(out.at("B").idata == std::vector<int64_t>{9, 8, 7, 6});
}
