// Reference interpreter: executes a kernel with eager Fortran-style
// semantics over concrete arrays. This is the differential oracle; it is
// deliberately independent of the IR and lifting machinery.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "stlift/ast.hpp"

namespace stlift {

// Dense 1-based multidimensional array of int64 or double.
struct Tensor {
    ast::ElemKind kind = ast::ElemKind::Float;
    std::vector<int64_t> extents;
    std::vector<double> fdata;
    std::vector<int64_t> idata;

    static Tensor zeros(ast::ElemKind k, std::vector<int64_t> ext) {
        Tensor t;
        t.kind = k;
        t.extents = std::move(ext);
        size_t n = 1;
        for (int64_t e : t.extents) n *= static_cast<size_t>(e);
        if (k == ast::ElemKind::Float) t.fdata.assign(n, 0.0);
        else t.idata.assign(n, 0);
        return t;
    }

    size_t size() const { return kind == ast::ElemKind::Float ? fdata.size() : idata.size(); }

    size_t flat_index(const std::vector<int64_t>& idx) const {
        size_t flat = 0;
        for (size_t d = 0; d < extents.size(); ++d) {
            int64_t i = idx[d];
            if (i < 1 || i > extents[d])
                throw Error(ErrorCode::OutOfBounds,
                            "index " + std::to_string(i) + " outside [1, " +
                                std::to_string(extents[d]) + "] in dimension " + std::to_string(d + 1));
            flat = flat * static_cast<size_t>(extents[d]) + static_cast<size_t>(i - 1);
        }
        return flat;
    }

    double fget(const std::vector<int64_t>& idx) const { return fdata[flat_index(idx)]; }
    int64_t iget(const std::vector<int64_t>& idx) const { return idata[flat_index(idx)]; }
    void fset(const std::vector<int64_t>& idx, double v) { fdata[flat_index(idx)] = v; }
    void iset(const std::vector<int64_t>& idx, int64_t v) { idata[flat_index(idx)] = v; }
};

struct KernelInputs {
    std::map<std::string, Tensor> arrays;
    std::map<std::string, int64_t> int_params;
    std::map<std::string, double> float_params;
};

namespace detail {

struct InterpState {
    const ast::KernelAst* kernel;
    std::map<std::string, Tensor>* arrays;
    std::map<std::string, int64_t> ints;      // loop indices + int params
    std::map<std::string, double> floats;     // float params + scalar temps
    std::map<std::string, int64_t> int_temps; // scalar temps in int kernels

    bool scalar_is_float(const std::string& n) const {
        return floats.count(n) > 0;
    }
};

inline double eval_f(const ast::ExprPtr& e, InterpState& st);
inline int64_t eval_i(const ast::ExprPtr& e, InterpState& st);

inline std::vector<int64_t> eval_subscripts(const ast::ExprPtr& ref, InterpState& st) {
    std::vector<int64_t> idx;
    idx.reserve(ref->args.size());
    for (const auto& a : ref->args) idx.push_back(eval_i(a, st));
    return idx;
}

inline const Tensor& tensor_for(const std::string& name, InterpState& st, Span sp) {
    auto it = st.arrays->find(name);
    if (it == st.arrays->end())
        throw Error(ErrorCode::MissingInput, "array '" + name + "' has no value", sp);
    return it->second;
}

inline int64_t eval_i(const ast::ExprPtr& e, InterpState& st) {
    switch (e->kind) {
    case ast::Expr::Kind::Number:
        return e->number.as_integer();
    case ast::Expr::Kind::Var: {
        auto it = st.ints.find(e->name);
        if (it != st.ints.end()) return it->second;
        auto it2 = st.int_temps.find(e->name);
        if (it2 != st.int_temps.end()) return it2->second;
        throw Error(ErrorCode::MissingInput, "no integer value for '" + e->name + "'", e->span);
    }
    case ast::Expr::Kind::ArrayRef: {
        const Tensor& t = tensor_for(e->name, st, e->span);
        if (t.kind != ast::ElemKind::Int)
            throw Error(ErrorCode::Internal, "float array in integer context", e->span);
        return t.iget(eval_subscripts(e, st));
    }
    case ast::Expr::Kind::Neg:
        return -eval_i(e->args[0], st);
    case ast::Expr::Kind::Binary: {
        int64_t a = eval_i(e->args[0], st);
        int64_t b = eval_i(e->args[1], st);
        switch (e->op) {
        case ast::BinOp::Add: return a + b;
        case ast::BinOp::Sub: return a - b;
        case ast::BinOp::Mul: return a * b;
        case ast::BinOp::Div:
            if (b == 0) throw Error(ErrorCode::DivisionByZeroConstant, "integer division by zero", e->span);
            return a / b;
        case ast::BinOp::Mod:
            if (b == 0) throw Error(ErrorCode::DivisionByZeroConstant, "integer modulo by zero", e->span);
            return a % b;
        }
        return 0;
    }
    }
    return 0;
}

inline double eval_f(const ast::ExprPtr& e, InterpState& st) {
    switch (e->kind) {
    case ast::Expr::Kind::Number:
        return e->number.to_double();
    case ast::Expr::Kind::Var: {
        auto f = st.floats.find(e->name);
        if (f != st.floats.end()) return f->second;
        return static_cast<double>(eval_i(e, st));
    }
    case ast::Expr::Kind::ArrayRef: {
        const Tensor& t = tensor_for(e->name, st, e->span);
        if (t.kind == ast::ElemKind::Int) return static_cast<double>(t.iget(eval_subscripts(e, st)));
        return t.fget(eval_subscripts(e, st));
    }
    case ast::Expr::Kind::Neg:
        return -eval_f(e->args[0], st);
    case ast::Expr::Kind::Binary: {
        double a = eval_f(e->args[0], st);
        double b = eval_f(e->args[1], st);
        switch (e->op) {
        case ast::BinOp::Add: return a + b;
        case ast::BinOp::Sub: return a - b;
        case ast::BinOp::Mul: return a * b;
        case ast::BinOp::Div: return a / b;
        case ast::BinOp::Mod:
            throw Error(ErrorCode::UnsupportedConstruct, "'%' on float values", e->span);
        }
        return 0;
    }
    }
    return 0;
}

inline bool eval_cond(const ast::CondPtr& c, InterpState& st) {
    switch (c->kind) {
    case ast::CondExpr::Kind::Compare: {
        int64_t a = eval_i(c->lhs, st);
        int64_t b = eval_i(c->rhs, st);
        switch (c->op) {
        case ast::CmpOp::Eq: return a == b;
        case ast::CmpOp::Ne: return a != b;
        case ast::CmpOp::Lt: return a < b;
        case ast::CmpOp::Le: return a <= b;
        case ast::CmpOp::Gt: return a > b;
        case ast::CmpOp::Ge: return a >= b;
        }
        return false;
    }
    case ast::CondExpr::Kind::And: return eval_cond(c->args[0], st) && eval_cond(c->args[1], st);
    case ast::CondExpr::Kind::Or: return eval_cond(c->args[0], st) || eval_cond(c->args[1], st);
    case ast::CondExpr::Kind::Not: return !eval_cond(c->args[0], st);
    }
    return false;
}

inline void exec_stmts(const std::vector<ast::StmtPtr>& body, InterpState& st);

inline void exec_loop(const ast::LoopNode& loop, InterpState& st) {
    int64_t lo = eval_i(loop.init, st);
    int64_t hi = eval_i(loop.bound, st);
    int64_t step = loop.step;
    for (int64_t v = lo; step > 0 ? v <= hi : v >= hi; v += step) {
        st.ints[loop.index] = v;
        exec_stmts(loop.body, st);
    }
    st.ints.erase(loop.index);
}

inline void exec_stmts(const std::vector<ast::StmtPtr>& body, InterpState& st) {
    for (const auto& s : body) {
        if (auto* a = std::get_if<ast::Assign>(&s->node)) {
            if (a->lhs->kind == ast::Expr::Kind::ArrayRef) {
                Tensor& t = (*st.arrays)[a->lhs->name];
                auto idx = eval_subscripts(a->lhs, st);
                if (t.kind == ast::ElemKind::Float) t.fset(idx, eval_f(a->rhs, st));
                else t.iset(idx, eval_i(a->rhs, st));
            } else {
                // scalar temp: float unless the rhs is integral-only in an int kernel
                bool as_int = true;
                try {
                    st.int_temps[a->lhs->name] = eval_i(a->rhs, st);
                } catch (const Error&) {
                    as_int = false;
                }
                if (!as_int) {
                    st.int_temps.erase(a->lhs->name);
                    st.floats[a->lhs->name] = eval_f(a->rhs, st);
                }
            }
        } else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
            bool taken = false;
            for (const auto& arm : f->arms) {
                if (eval_cond(arm.cond, st)) {
                    exec_stmts(arm.body, st);
                    taken = true;
                    break;
                }
            }
            if (!taken) exec_stmts(f->else_body, st);
        } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
            exec_loop(**lp, st);
        }
    }
}

}  // namespace detail

// Returns the full array map after execution (written and untouched arrays).
inline std::map<std::string, Tensor> interpret_kernel(const ast::KernelAst& k, const KernelInputs& in) {
    std::map<std::string, Tensor> arrays = in.arrays;
    detail::InterpState st{&k, &arrays, in.int_params, in.float_params, {}};
    for (const auto& decl : k.arrays) {
        auto it = arrays.find(decl.name);
        if (it == arrays.end())
            throw Error(ErrorCode::MissingInput, "no input provided for array '" + decl.name + "'");
        if (static_cast<int>(it->second.extents.size()) != decl.rank())
            throw Error(ErrorCode::ShapeMismatch,
                        "array '" + decl.name + "' declared rank " + std::to_string(decl.rank()) +
                            " but input has rank " + std::to_string(it->second.extents.size()));
        if (it->second.kind != decl.kind)
            throw Error(ErrorCode::ShapeMismatch, "array '" + decl.name + "' element kind mismatch");
    }
    for (const auto& p : k.params) {
        if (p.kind == ast::ElemKind::Int && !st.ints.count(p.name))
            throw Error(ErrorCode::MissingInput, "no value for int parameter '" + p.name + "'");
        if (p.kind == ast::ElemKind::Float && !st.floats.count(p.name))
            throw Error(ErrorCode::MissingInput, "no value for float parameter '" + p.name + "'");
    }
    detail::exec_loop(*k.top, st);
    return arrays;
}

// Names of arrays assigned anywhere in the kernel, in declaration order.
inline std::vector<std::string> output_arrays(const ast::KernelAst& k) {
    std::set<std::string> written;
    auto scan = [&](const std::vector<ast::StmtPtr>& body, auto&& self) -> void {
        for (const auto& s : body) {
            if (auto* a = std::get_if<ast::Assign>(&s->node)) {
                if (a->lhs->kind == ast::Expr::Kind::ArrayRef) written.insert(a->lhs->name);
            } else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
                for (const auto& arm : f->arms) self(arm.body, self);
                self(f->else_body, self);
            } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
                self((*lp)->body, self);
            }
        }
    };
    scan(k.top->body, scan);
    std::vector<std::string> out;
    for (const auto& a : k.arrays)
        if (written.count(a.name)) out.push_back(a.name);
    return out;
}

}  // namespace stlift
