// SSA region IR: one region per loop, operations in execution order, each
// region beginning with input operations and ending with a return. Inner
// loops are functionalized as Loopcall operations with dual formal values.
// Multiple output arrays are unified into one abstract output record whose
// leading coordinate selects the field; the record collapses to the plain
// array for single-output kernels.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stlift/frontend.hpp"
#include "stlift/interp.hpp"
#include "stlift/sym.hpp"

namespace stlift {

enum class OpKind { Input, Bound, Scalar, Get, Set, Loopcall, Phi, Return };

inline const char* op_kind_name(OpKind k) {
    switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Bound: return "bound";
    case OpKind::Scalar: return "scalar";
    case OpKind::Get: return "get";
    case OpKind::Set: return "set";
    case OpKind::Loopcall: return "loopcall";
    case OpKind::Phi: return "phi";
    case OpKind::Return: return "return";
    }
    return "?";
}

enum class DataType { Array, Index, Num };

// An operand is either another operation in the same region or a symbolic
// leaf expression over loop counters, int params and constants.
struct Operand {
    int op = -1;          // -1 = leaf
    sym::ExprPtr leaf;

    bool is_leaf() const { return op < 0; }
    static Operand of(int id) { return {id, nullptr}; }
    static Operand of(sym::ExprPtr e) { return {-1, std::move(e)}; }
};

struct PhiArm {
    Operand value;
    sym::CondPtr cond;
};

struct Operation {
    OpKind kind;
    int id = -1;                      // region-local index
    DataType dtype = DataType::Num;
    std::string var;                  // data attribute: variable instance name

    // Input
    int array_rank = 0;
    ast::ElemKind elem_kind = ast::ElemKind::Float;

    // Bound
    sym::ExprPtr lo, hi;
    int64_t step = 1;

    // Scalar
    ast::BinOp scalar_op = ast::BinOp::Add;
    std::vector<Operand> operands;    // Scalar: 2; Get: [array]; Set: [array, value]

    // Get / Set index expressions (affine over counters/params)
    std::vector<sym::ExprPtr> index;

    // Loopcall
    int callee_region = -1;
    std::vector<std::pair<std::string, Operand>> bindings;  // formal name -> actual

    // Phi
    std::vector<PhiArm> arms;
    Operand init;                     // default (initial value) operand
    bool header = false;              // loop-carried merge for this region's loop

    // Return
    Operand ret;
};

struct Region {
    int id = -1;
    int level = 1;                    // innermost loop = 1
    std::string counter;              // loop index symbol
    sym::ExprPtr lo, hi;
    int64_t step = 1;
    bool single_iteration = false;    // lo == hi statically
    std::vector<Operation> ops;
    std::map<std::string, int> formals;  // formal name -> input op id
    int output_phi = -1;              // op id of the output-record phi (or -1 after elimination)
    int ret_op = -1;

    const Operation& op(int id) const { return ops[static_cast<size_t>(id)]; }
    Operation& op(int id) { return ops[static_cast<size_t>(id)]; }
};

struct OutputField {
    std::string array;        // source array name
    std::string initial_sym;  // free-variable name of its initial state, e.g. "B0"
    int rank = 0;
    ast::ElemKind kind = ast::ElemKind::Float;
};

struct IrModule {
    std::string kernel;
    std::vector<Region> regions;      // region id = index
    int top_region = -1;
    std::vector<OutputField> outputs; // record fields, declaration order
    int record_rank = 0;              // output position dims incl field coordinate
    bool has_field_dim = false;       // true when outputs.size() > 1

    const Region& region(int id) const { return regions[static_cast<size_t>(id)]; }
    int levels() const { return region(top_region).level; }
};

// record position = [field] + subscripts (field dim only when multi-output)
inline std::vector<sym::ExprPtr> record_pos(const IrModule& m, int field,
                                            std::vector<sym::ExprPtr> subs) {
    std::vector<sym::ExprPtr> pos;
    if (m.has_field_dim) pos.push_back(sym::constant(field));
    // pad lower-rank fields with trailing 1s
    for (auto& s : subs) pos.push_back(std::move(s));
    while (static_cast<int>(pos.size()) < m.record_rank) pos.push_back(sym::constant(1));
    return pos;
}

// ---- lowering --------------------------------------------------------------

namespace lower_detail {

struct LowerCtx {
    const ast::KernelAst* kernel;
    IrModule* mod;
    std::map<std::string, int> output_field;  // array name -> field index
};

struct BodyEnv {
    Region* region;
    // array state: the record's current value (op id)
    int state;
    // scalar temps: name -> operand
    std::map<std::string, Operand> temps;
    // formal input op per non-output array / float param
    std::map<std::string, int> inputs;
    // symbols in scope usable as leaf exprs (loop counters incl. enclosing, int params)
    std::vector<std::string> counters;
};

inline sym::ExprPtr lower_affine(const ast::ExprPtr& e) {
    switch (e->kind) {
    case ast::Expr::Kind::Number: return sym::constant(e->number);
    case ast::Expr::Kind::Var: return sym::symbol(e->name);
    case ast::Expr::Kind::Neg: return sym::neg(lower_affine(e->args[0]));
    case ast::Expr::Kind::Binary: {
        sym::ExprPtr a = lower_affine(e->args[0]);
        sym::ExprPtr b = lower_affine(e->args[1]);
        switch (e->op) {
        case ast::BinOp::Add: return sym::add(a, b);
        case ast::BinOp::Sub: return sym::sub(a, b);
        case ast::BinOp::Mul: return sym::mul(a, b);
        case ast::BinOp::Div: return sym::div(a, b);
        case ast::BinOp::Mod: return sym::mod(a, b);
        }
        break;
    }
    case ast::Expr::Kind::ArrayRef:
        throw Error(ErrorCode::NonAffineSubscript, "array read inside an index expression", e->span);
    }
    throw Error(ErrorCode::Internal, "unreachable affine lowering");
}

inline int push_op(Region& r, Operation op) {
    op.id = static_cast<int>(r.ops.size());
    r.ops.push_back(std::move(op));
    return r.ops.back().id;
}

inline std::string in_name(const Region& r, int id) { return r.op(id).var; }

// forward
inline int lower_region(LowerCtx& ctx, const ast::LoopNode& loop,
                        const std::vector<std::string>& outer_counters, int level);

inline Operand lower_value(LowerCtx& ctx, BodyEnv& env, const ast::ExprPtr& e);

inline Operand lower_array_read(LowerCtx& ctx, BodyEnv& env, const ast::ExprPtr& e) {
    std::vector<sym::ExprPtr> idx;
    for (const auto& a : e->args) idx.push_back(lower_affine(a));
    Operation g;
    g.kind = OpKind::Get;
    g.dtype = DataType::Num;
    auto field = ctx.output_field.find(e->name);
    if (field != ctx.output_field.end()) {
        g.operands = {Operand::of(env.state)};
        g.index = record_pos(*ctx.mod, field->second, std::move(idx));
        g.var = e->name + "@" + std::to_string(env.region->ops.size());
    } else {
        auto it = env.inputs.find(e->name);
        if (it == env.inputs.end())
            throw Error(ErrorCode::Internal, "array '" + e->name + "' has no formal input", e->span);
        g.operands = {Operand::of(it->second)};
        g.index = std::move(idx);
        g.var = e->name + "@" + std::to_string(env.region->ops.size());
    }
    return Operand::of(push_op(*env.region, std::move(g)));
}

inline Operand lower_value(LowerCtx& ctx, BodyEnv& env, const ast::ExprPtr& e) {
    switch (e->kind) {
    case ast::Expr::Kind::Number:
        return Operand::of(sym::constant(e->number));
    case ast::Expr::Kind::Var: {
        auto t = env.temps.find(e->name);
        if (t != env.temps.end()) return t->second;
        auto f = env.inputs.find(e->name);
        if (f != env.inputs.end()) return Operand::of(f->second);  // float param formal
        return Operand::of(sym::symbol(e->name));  // loop counter or int param
    }
    case ast::Expr::Kind::ArrayRef:
        return lower_array_read(ctx, env, e);
    case ast::Expr::Kind::Neg: {
        Operand a = lower_value(ctx, env, e->args[0]);
        if (a.is_leaf()) return Operand::of(sym::neg(a.leaf));
        Operation s;
        s.kind = OpKind::Scalar;
        s.scalar_op = ast::BinOp::Sub;
        s.operands = {Operand::of(sym::constant(0)), a};
        s.var = "neg@" + std::to_string(env.region->ops.size());
        return Operand::of(push_op(*env.region, std::move(s)));
    }
    case ast::Expr::Kind::Binary: {
        Operand a = lower_value(ctx, env, e->args[0]);
        Operand b = lower_value(ctx, env, e->args[1]);
        if (a.is_leaf() && b.is_leaf()) {
            switch (e->op) {
            case ast::BinOp::Add: return Operand::of(sym::add(a.leaf, b.leaf));
            case ast::BinOp::Sub: return Operand::of(sym::sub(a.leaf, b.leaf));
            case ast::BinOp::Mul: return Operand::of(sym::mul(a.leaf, b.leaf));
            case ast::BinOp::Div: return Operand::of(sym::div(a.leaf, b.leaf));
            case ast::BinOp::Mod: return Operand::of(sym::mod(a.leaf, b.leaf));
            }
        }
        Operation s;
        s.kind = OpKind::Scalar;
        s.scalar_op = e->op;
        s.operands = {a, b};
        s.var = "v@" + std::to_string(env.region->ops.size());
        return Operand::of(push_op(*env.region, std::move(s)));
    }
    }
    throw Error(ErrorCode::Internal, "unreachable value lowering");
}

inline sym::CondPtr lower_cond(const ast::CondPtr& c) {
    switch (c->kind) {
    case ast::CondExpr::Kind::Compare: {
        sym::ExprPtr a = lower_affine(c->lhs);
        sym::ExprPtr b = lower_affine(c->rhs);
        switch (c->op) {
        case ast::CmpOp::Eq: return sym::eq(a, b);
        case ast::CmpOp::Ne: return sym::ne(a, b);
        case ast::CmpOp::Lt: return sym::lt(a, b);
        case ast::CmpOp::Le: return sym::le(a, b);
        case ast::CmpOp::Gt: return sym::gt(a, b);
        case ast::CmpOp::Ge: return sym::ge(a, b);
        }
        break;
    }
    case ast::CondExpr::Kind::And:
        return sym::conj2(lower_cond(c->args[0]), lower_cond(c->args[1]));
    case ast::CondExpr::Kind::Or:
        return sym::disj({lower_cond(c->args[0]), lower_cond(c->args[1])});
    case ast::CondExpr::Kind::Not:
        return sym::negate(lower_cond(c->args[0]));
    }
    throw Error(ErrorCode::Internal, "unreachable cond lowering");
}

inline void lower_stmts(LowerCtx& ctx, BodyEnv& env, const std::vector<ast::StmtPtr>& body);

inline void lower_if(LowerCtx& ctx, BodyEnv& env, const ast::IfBlock& blk) {
    struct ArmResult {
        sym::CondPtr cond;
        int state;
        std::map<std::string, Operand> temps;
    };
    std::vector<ArmResult> results;
    sym::CondPtr taken = sym::cfalse();
    for (const auto& arm : blk.arms) {
        sym::CondPtr c = lower_cond(arm.cond);
        sym::CondPtr path = sym::conj2(c, sym::negate(taken));
        taken = sym::disj({taken, c});
        BodyEnv arm_env = env;
        lower_stmts(ctx, arm_env, arm.body);
        results.push_back({path, arm_env.state, arm_env.temps});
    }
    {
        BodyEnv else_env = env;
        lower_stmts(ctx, else_env, blk.else_body);
        results.push_back({sym::negate(taken), else_env.state, else_env.temps});
    }
    // merge array state
    bool state_diverges = false;
    for (const auto& r : results) state_diverges = state_diverges || r.state != env.state;
    if (state_diverges) {
        Operation phi;
        phi.kind = OpKind::Phi;
        phi.dtype = DataType::Array;
        phi.var = "state.join@" + std::to_string(env.region->ops.size());
        for (const auto& r : results)
            phi.arms.push_back({Operand::of(r.state), r.cond});
        phi.init = Operand::of(env.state);  // unreachable; arms are exhaustive
        env.state = push_op(*env.region, std::move(phi));
    }
    // merge scalar temps assigned in any arm
    auto operand_differs = [](const Operand& a, const Operand& b) {
        if (a.is_leaf() != b.is_leaf()) return true;
        if (a.is_leaf()) return !sym::expr_eq(a.leaf, b.leaf);
        return a.op != b.op;
    };
    std::map<std::string, int> assigned;
    for (const auto& r : results)
        for (const auto& [name, op] : r.temps) {
            auto prior = env.temps.find(name);
            if (prior == env.temps.end() || operand_differs(prior->second, op)) assigned[name] = 1;
        }
    for (const auto& [name, _] : assigned) {
        Operation phi;
        phi.kind = OpKind::Phi;
        phi.dtype = DataType::Num;
        phi.var = name;
        bool complete = true;
        for (const auto& r : results) {
            auto it = r.temps.find(name);
            if (it == r.temps.end()) { complete = false; continue; }
            phi.arms.push_back({it->second, r.cond});
        }
        if (!complete) {
            auto prior = env.temps.find(name);
            if (prior == env.temps.end())
                throw Error(ErrorCode::UnsupportedConstruct,
                            "scalar '" + name + "' is only assigned on some branches");
            // arms that did not assign keep the prior value; fold into init
        }
        phi.init = complete ? phi.arms.back().value : env.temps[name];
        if (complete) phi.arms.pop_back();  // last arm becomes the default
        env.temps[name] = Operand::of(push_op(*env.region, std::move(phi)));
    }
}

inline void lower_stmts(LowerCtx& ctx, BodyEnv& env, const std::vector<ast::StmtPtr>& body) {
    for (const auto& s : body) {
        if (auto* a = std::get_if<ast::Assign>(&s->node)) {
            if (a->lhs->kind == ast::Expr::Kind::ArrayRef) {
                auto field = ctx.output_field.find(a->lhs->name);
                if (field == ctx.output_field.end())
                    throw Error(ErrorCode::Internal, "write to non-output array", s->span);
                std::vector<sym::ExprPtr> subs;
                for (const auto& sub : a->lhs->args) subs.push_back(lower_affine(sub));
                Operand value = lower_value(ctx, env, a->rhs);
                Operation st;
                st.kind = OpKind::Set;
                st.dtype = DataType::Array;
                st.var = a->lhs->name + "@" + std::to_string(env.region->ops.size());
                st.operands = {Operand::of(env.state), value};
                st.index = record_pos(*ctx.mod, field->second, std::move(subs));
                env.state = push_op(*env.region, std::move(st));
            } else {
                env.temps[a->lhs->name] = lower_value(ctx, env, a->rhs);
            }
        } else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
            lower_if(ctx, env, *f);
        } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
            const ast::LoopNode& inner = **lp;
            int callee = lower_region(ctx, inner, env.counters, inner.depth());
            Operation call;
            call.kind = OpKind::Loopcall;
            call.dtype = DataType::Array;
            call.callee_region = callee;
            call.var = "call." + std::to_string(callee) + "@" + std::to_string(env.region->ops.size());
            const Region& cr = ctx.mod->region(callee);
            for (const auto& [formal, input_id] : cr.formals) {
                const Operation& fin = cr.op(input_id);
                // formal names are "r<id>.<name>"; bind by source name
                std::string src = fin.var.substr(fin.var.find('.') + 1);
                if (src == "__state") {
                    call.bindings.push_back({formal, Operand::of(env.state)});
                } else {
                    auto it = env.inputs.find(src);
                    if (it == env.inputs.end())
                        throw Error(ErrorCode::Internal, "no outer value for formal '" + formal + "'");
                    call.bindings.push_back({formal, Operand::of(it->second)});
                }
            }
            env.state = push_op(*env.region, std::move(call));
        }
    }
}

// arrays read (not through the record) and float params used inside a loop
struct UsedNames {
    std::set<std::string> input_arrays;
    std::set<std::string> float_params;
};

inline void collect_uses_expr(LowerCtx& ctx, const ast::ExprPtr& e, UsedNames& u) {
    switch (e->kind) {
    case ast::Expr::Kind::Number: return;
    case ast::Expr::Kind::Var: {
        const ast::ParamDecl* p = ctx.kernel->find_param(e->name);
        if (p && p->kind == ast::ElemKind::Float) u.float_params.insert(e->name);
        return;
    }
    case ast::Expr::Kind::ArrayRef:
        if (!ctx.output_field.count(e->name)) u.input_arrays.insert(e->name);
        for (const auto& a : e->args) collect_uses_expr(ctx, a, u);
        return;
    default:
        for (const auto& a : e->args) collect_uses_expr(ctx, a, u);
    }
}

inline void collect_uses(LowerCtx& ctx, const std::vector<ast::StmtPtr>& body, UsedNames& u) {
    for (const auto& s : body) {
        if (auto* a = std::get_if<ast::Assign>(&s->node)) {
            collect_uses_expr(ctx, a->rhs, u);
            if (a->lhs->kind == ast::Expr::Kind::ArrayRef)
                for (const auto& sub : a->lhs->args) collect_uses_expr(ctx, sub, u);
        } else if (auto* f = std::get_if<ast::IfBlock>(&s->node)) {
            // branch conditions are affine index compares by the regularity
            // precondition; they reference no arrays or float params
            for (const auto& arm : f->arms) collect_uses(ctx, arm.body, u);
            collect_uses(ctx, f->else_body, u);
        } else if (auto* lp = std::get_if<ast::LoopPtr>(&s->node)) {
            collect_uses(ctx, (*lp)->body, u);
        }
    }
}

// Drop operations unreachable from the return (join phis absorbed into the
// extended header phi, unused temporaries). Inputs and the bound op stay.
inline void prune_dead_ops(Region& r) {
    std::vector<bool> live(r.ops.size(), false);
    std::vector<int> work{r.ret_op};
    auto mark = [&](const Operand& o, std::vector<int>& w) {
        if (!o.is_leaf() && !live[static_cast<size_t>(o.op)]) {
            live[static_cast<size_t>(o.op)] = true;
            w.push_back(o.op);
        }
    };
    live[static_cast<size_t>(r.ret_op)] = true;
    while (!work.empty()) {
        const Operation& o = r.op(work.back());
        work.pop_back();
        for (const auto& opnd : o.operands) mark(opnd, work);
        for (const auto& arm : o.arms) mark(arm.value, work);
        if (o.kind == OpKind::Phi) mark(o.init, work);
        if (o.kind == OpKind::Loopcall)
            for (const auto& [formal, actual] : o.bindings) mark(actual, work);
        if (o.kind == OpKind::Return) mark(o.ret, work);
    }
    for (auto& o : r.ops)
        if (o.kind == OpKind::Input || o.kind == OpKind::Bound) live[static_cast<size_t>(o.id)] = true;

    std::vector<int> remap(r.ops.size(), -1);
    std::vector<Operation> kept;
    for (size_t i = 0; i < r.ops.size(); ++i) {
        if (!live[i]) continue;
        remap[i] = static_cast<int>(kept.size());
        kept.push_back(std::move(r.ops[i]));
    }
    auto fix = [&remap](Operand& o) {
        if (!o.is_leaf()) o.op = remap[static_cast<size_t>(o.op)];
    };
    for (auto& o : kept) {
        o.id = remap[static_cast<size_t>(o.id)];
        for (auto& opnd : o.operands) fix(opnd);
        for (auto& arm : o.arms) fix(arm.value);
        if (o.kind == OpKind::Phi) fix(o.init);
        if (o.kind == OpKind::Loopcall)
            for (auto& [formal, actual] : o.bindings) fix(actual);
        if (o.kind == OpKind::Return) fix(o.ret);
        // ids are their own index again after compaction
    }
    for (size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<int>(i);
    r.ops = std::move(kept);
    for (auto& [name, id] : r.formals) id = remap[static_cast<size_t>(id)];
    r.output_phi = r.output_phi >= 0 ? remap[static_cast<size_t>(r.output_phi)] : -1;
    r.ret_op = remap[static_cast<size_t>(r.ret_op)];
}

inline int lower_region(LowerCtx& ctx, const ast::LoopNode& loop,
                        const std::vector<std::string>& outer_counters, int level) {
    IrModule& m = *ctx.mod;
    int rid = static_cast<int>(m.regions.size());
    m.regions.emplace_back();  // reserve the slot; recursion below may reallocate
    Region r;
    r.id = rid;
    r.level = level;
    r.counter = loop.index;
    r.lo = lower_affine(loop.init);
    r.hi = lower_affine(loop.bound);
    r.step = loop.step;
    if (auto diff = sym::const_val(sym::sub(r.hi, r.lo))) r.single_iteration = diff->is_zero();

    std::string prefix = "r" + std::to_string(rid) + ".";
    bool top = outer_counters.empty();

    UsedNames used;
    collect_uses(ctx, loop.body, used);

    // input ops: output record state first, then input arrays, then float params
    BodyEnv env;
    env.region = &r;
    env.counters = outer_counters;
    env.counters.push_back(loop.index);

    {
        Operation in;
        in.kind = OpKind::Input;
        in.dtype = DataType::Array;
        in.array_rank = m.record_rank;
        std::string record_name = top ? (m.has_field_dim ? "$out0" : m.outputs[0].initial_sym)
                                      : prefix + "__state";
        in.var = record_name;
        int id = push_op(r, std::move(in));
        r.formals[record_name] = id;
        env.state = id;
    }
    for (const auto& name : used.input_arrays) {
        const ast::ArrayDecl* d = ctx.kernel->find_array(name);
        Operation in;
        in.kind = OpKind::Input;
        in.dtype = DataType::Array;
        in.array_rank = d->rank();
        in.elem_kind = d->kind;
        in.var = top ? name : prefix + name;
        int id = push_op(r, std::move(in));
        r.formals[in_name(r, id)] = id;
        env.inputs[name] = id;
    }
    for (const auto& name : used.float_params) {
        Operation in;
        in.kind = OpKind::Input;
        in.dtype = DataType::Num;
        in.var = top ? name : prefix + name;
        int id = push_op(r, std::move(in));
        r.formals[in_name(r, id)] = id;
        env.inputs[name] = id;
    }

    // bound op creates the loop counter
    {
        Operation b;
        b.kind = OpKind::Bound;
        b.dtype = DataType::Index;
        b.var = loop.index;
        b.lo = r.lo;
        b.hi = r.hi;
        b.step = r.step;
        push_op(r, std::move(b));
    }

    int initial_state = env.state;
    // single-iteration loops read the initial state directly (acyclic graph);
    // otherwise a header phi placeholder is the body's entry state
    int header_phi = -1;
    if (!r.single_iteration) {
        Operation phi;
        phi.kind = OpKind::Phi;
        phi.dtype = DataType::Array;
        phi.header = true;
        phi.var = "phi." + (m.has_field_dim ? std::string("out") : m.outputs[0].array);
        phi.init = Operand::of(initial_state);
        header_phi = push_op(r, std::move(phi));
        env.state = header_phi;
    }

    lower_stmts(ctx, env, loop.body);

    if (r.single_iteration) {
        Operation phi;
        phi.kind = OpKind::Phi;
        phi.dtype = DataType::Array;
        phi.header = true;
        phi.var = "phi." + (m.has_field_dim ? std::string("out") : m.outputs[0].array);
        phi.init = Operand::of(initial_state);
        if (env.state != initial_state) phi.arms.push_back({Operand::of(env.state), sym::ctrue()});
        r.output_phi = push_op(r, std::move(phi));
    } else {
        // fill the header phi arms, flattening join phis produced by ifs
        Operation& phi = r.op(header_phi);
        std::vector<PhiArm> arms;
        std::function<void(Operand, sym::CondPtr)> flatten = [&](Operand v, sym::CondPtr c) {
            if (!v.is_leaf()) {
                const Operation& o = r.op(v.op);
                if (o.kind == OpKind::Phi && !o.header && o.dtype == DataType::Array) {
                    for (const auto& arm : o.arms) flatten(arm.value, sym::conj2(c, arm.cond));
                    return;
                }
            }
            arms.push_back({v, c});
        };
        if (env.state != header_phi) flatten(Operand::of(env.state), sym::ctrue());
        phi.arms = std::move(arms);
        r.output_phi = header_phi;
    }

    {
        Operation ret;
        ret.kind = OpKind::Return;
        ret.dtype = DataType::Array;
        ret.var = "ret";
        ret.ret = Operand::of(r.output_phi);
        r.ret_op = push_op(r, std::move(ret));
    }
    prune_dead_ops(r);
    m.regions[static_cast<size_t>(rid)] = std::move(r);
    return rid;
}

}  // namespace lower_detail

inline IrModule lower_to_ir(const ast::KernelAst& kernel_in) {
    ast::KernelAst k = strip_directives(kernel_in);
    RegularityReport reg = analyze_regularity(k);
    if (const LevelRegularity* bad = reg.first_irregular())
        throw Error(ErrorCode::IrregularLoop,
                    "loop level " + std::to_string(bad->level) + " (index '" + bad->index +
                        "') is irregular: data-dependent branch structure",
                    bad->offending.empty() ? Span{} : bad->offending.front());

    IrModule m;
    m.kernel = k.name;
    std::vector<std::string> outs = output_arrays(k);
    if (outs.empty()) m.outputs.push_back({"__none", "__none0", 0, ast::ElemKind::Float});
    for (const auto& name : outs) {
        const ast::ArrayDecl* d = k.find_array(name);
        m.outputs.push_back({name, name + "0", d->rank(), d->kind});
    }
    m.has_field_dim = m.outputs.size() > 1;
    int max_rank = 0;
    for (const auto& f : m.outputs) max_rank = std::max(max_rank, f.rank);
    m.record_rank = max_rank + (m.has_field_dim ? 1 : 0);

    lower_detail::LowerCtx ctx{&k, &m, {}};
    for (size_t i = 0; i < m.outputs.size(); ++i) ctx.output_field[m.outputs[i].array] = static_cast<int>(i);
    m.top_region = lower_detail::lower_region(ctx, *k.top, {}, k.top->depth());
    return m;
}

// ---- textual dump -----------------------------------------------------------

inline std::string operand_str(const Operand& o) {
    if (o.is_leaf()) return sym::expr_str(o.leaf);
    return "%" + std::to_string(o.op);
}

inline std::string dump_ir(const IrModule& m) {
    std::string out;
    out += "module " + m.kernel + "\n";
    out += "outputs:";
    for (const auto& f : m.outputs) out += " " + f.array;
    out += m.has_field_dim ? "  (record with field coordinate)\n" : "\n";
    for (const auto& r : m.regions) {
        out += "region @" + std::to_string(r.id) + " level " + std::to_string(r.level) + " do " +
               r.counter + " = " + sym::expr_str(r.lo) + ", " + sym::expr_str(r.hi);
        if (r.step != 1) out += ", " + std::to_string(r.step);
        out += "\n";
        for (const auto& o : r.ops) {
            out += "  %" + std::to_string(o.id) + " = " + op_kind_name(o.kind);
            switch (o.kind) {
            case OpKind::Input:
                out += " " + o.var;
                if (o.dtype == DataType::Array) out += " : array" + std::to_string(o.array_rank);
                break;
            case OpKind::Bound:
                out += " " + o.var + " : [" + sym::expr_str(o.lo) + " .. " + sym::expr_str(o.hi) +
                       " step " + std::to_string(o.step) + "]";
                break;
            case OpKind::Scalar:
                out += std::string(" ") + ast::bin_op_text(o.scalar_op) + " " +
                       operand_str(o.operands[0]) + ", " + operand_str(o.operands[1]);
                break;
            case OpKind::Get: {
                out += " " + operand_str(o.operands[0]) + "[";
                for (size_t i = 0; i < o.index.size(); ++i) {
                    if (i) out += ", ";
                    out += sym::expr_str(o.index[i]);
                }
                out += "]";
                break;
            }
            case OpKind::Set: {
                out += " " + operand_str(o.operands[0]) + "[";
                for (size_t i = 0; i < o.index.size(); ++i) {
                    if (i) out += ", ";
                    out += sym::expr_str(o.index[i]);
                }
                out += "] <- " + operand_str(o.operands[1]);
                break;
            }
            case OpKind::Loopcall: {
                out += " @" + std::to_string(o.callee_region) + "(";
                for (size_t i = 0; i < o.bindings.size(); ++i) {
                    if (i) out += ", ";
                    out += o.bindings[i].first + "=" + operand_str(o.bindings[i].second);
                }
                out += ")";
                break;
            }
            case OpKind::Phi: {
                out += o.header ? " header [" : " [";
                for (size_t i = 0; i < o.arms.size(); ++i) {
                    if (i) out += ", ";
                    out += "(" + operand_str(o.arms[i].value) + ", " + sym::cond_str(o.arms[i].cond) + ")";
                }
                out += "] default " + operand_str(o.init);
                break;
            }
            case OpKind::Return:
                out += " " + operand_str(o.ret);
                break;
            }
            out += "\n";
        }
    }
    return out;
}

}  // namespace stlift
