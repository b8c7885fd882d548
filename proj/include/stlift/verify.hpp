// Differential verification: evaluate the lifted postcondition per element
// on random inputs and compare with the reference interpreter. The evaluator
// here mirrors runtime float semantics (doubles), unlike the checker's exact
// rationals.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stlift/codegen.hpp"
#include "stlift/interp.hpp"

namespace stlift {

struct VerifyConfig {
    int trials = 50;
    std::vector<int64_t> shape = {8, 8};
    uint64_t seed = 1;
    double tolerance = 1e-12;
};

struct Mismatch {
    std::string array;
    std::vector<int64_t> position;
    double expected;
    double got;
    int trial = 0;
};

struct VerificationReport {
    std::string kernel;
    int trials = 0;
    std::vector<int64_t> shape;
    double max_abs_error = 0.0;
    long long mismatch_count = 0;
    std::optional<Mismatch> first_mismatch;
    double tolerance = 0.0;

    bool pass() const { return mismatch_count == 0 && max_abs_error <= tolerance; }

    std::string str() const {
        std::string out = kernel + ": " + (pass() ? "PASS" : "FAIL");
        out += " trials=" + std::to_string(trials);
        out += " shape=";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) out += "x";
            out += std::to_string(shape[i]);
        }
        char buf[64];
        snprintf(buf, sizeof buf, " maxAbsError=%.3g", max_abs_error);
        out += buf;
        if (mismatch_count) {
            out += " mismatches=" + std::to_string(mismatch_count);
            if (first_mismatch) {
                out += " first at " + first_mismatch->array + "(";
                for (size_t i = 0; i < first_mismatch->position.size(); ++i) {
                    if (i) out += ", ";
                    out += std::to_string(first_mismatch->position[i]);
                }
                snprintf(buf, sizeof buf, ") expected=%.17g got=%.17g", first_mismatch->expected,
                         first_mismatch->got);
                out += buf;
            }
        }
        return out;
    }
};

namespace verify_detail {

struct NumEnv {
    const std::map<std::string, Tensor>* arrays;       // initial arrays, by summary name
    const std::map<std::string, int64_t>* index_vals;  // params + position vars
    const std::map<std::string, double>* float_params;
};

inline double eval_num(const sym::ExprPtr& e, const NumEnv& env);

inline int64_t eval_idx(const sym::ExprPtr& e, const NumEnv& env) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
        return e->value.as_integer();
    case ExprKind::Sym: {
        auto it = env.index_vals->find(e->name);
        if (it == env.index_vals->end())
            throw Error(ErrorCode::UnboundFreeVariable, "no value for index '" + e->name + "'");
        return it->second;
    }
    case ExprKind::Sum: {
        Rational acc = e->konst;
        for (const auto& t : e->terms) acc = acc + t.coeff * Rational(eval_idx(t.term, env));
        return acc.as_integer();
    }
    case ExprKind::Mul: {
        int64_t acc = 1;
        for (const auto& f : e->args) acc *= eval_idx(f, env);
        return acc;
    }
    case ExprKind::Div: {
        int64_t b = eval_idx(e->args[1], env);
        if (b == 0) throw Error(ErrorCode::DivisionByZeroConstant, "index division by zero");
        return eval_idx(e->args[0], env) / b;
    }
    case ExprKind::Mod: {
        int64_t b = eval_idx(e->args[1], env);
        if (b == 0) throw Error(ErrorCode::DivisionByZeroConstant, "index modulo by zero");
        int64_t r = eval_idx(e->args[0], env) % b;
        if (r < 0) r += b > 0 ? b : -b;
        return r;
    }
    case ExprKind::Get:
        throw Error(ErrorCode::UnboundFreeVariable, "array read in index position");
    }
    return 0;
}

inline double eval_num(const sym::ExprPtr& e, const NumEnv& env) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
        return e->value.to_double();
    case ExprKind::Sym: {
        auto f = env.float_params->find(e->name);
        if (f != env.float_params->end()) return f->second;
        auto it = env.index_vals->find(e->name);
        if (it != env.index_vals->end()) return static_cast<double>(it->second);
        throw Error(ErrorCode::UnboundFreeVariable, "no value for '" + e->name + "'");
    }
    case ExprKind::Sum: {
        // evaluate in canonical term order; constants fold last
        double acc = 0.0;
        bool first = true;
        for (const auto& t : e->terms) {
            double v = eval_num(t.term, env);
            if (t.coeff != Rational(1)) v = t.coeff.to_double() * v;
            acc = first ? v : acc + v;
            first = false;
        }
        if (!e->konst.is_zero() || first) acc = first ? e->konst.to_double() : acc + e->konst.to_double();
        return acc;
    }
    case ExprKind::Mul: {
        double acc = 1.0;
        bool first = true;
        for (const auto& f : e->args) {
            double v = eval_num(f, env);
            acc = first ? v : acc * v;
            first = false;
        }
        return acc;
    }
    case ExprKind::Div:
        return eval_num(e->args[0], env) / eval_num(e->args[1], env);
    case ExprKind::Mod:
        return static_cast<double>(eval_idx(e, env));
    case ExprKind::Get: {
        auto it = env.arrays->find(e->name);
        if (it == env.arrays->end())
            throw Error(ErrorCode::UnboundFreeVariable, "no input named '" + e->name + "'");
        std::vector<int64_t> idx;
        for (const auto& a : e->args) idx.push_back(eval_idx(a, env));
        const Tensor& t = it->second;
        return t.kind == ast::ElemKind::Int ? static_cast<double>(t.iget(idx)) : t.fget(idx);
    }
    }
    return 0.0;
}

inline bool eval_cond(const CondPtr& c, const NumEnv& env) {
    using sym::CondKind;
    switch (c->kind) {
    case CondKind::True: return true;
    case CondKind::False: return false;
    case CondKind::Cmp: {
        int64_t d = eval_idx(c->diff, env);
        switch (c->cmp) {
        case sym::CmpKind::Eq: return d == 0;
        case sym::CmpKind::Ne: return d != 0;
        case sym::CmpKind::Le: return d <= 0;
        }
        return false;
    }
    case CondKind::And:
        for (const auto& a : c->args)
            if (!eval_cond(a, env)) return false;
        return true;
    case CondKind::Or:
        for (const auto& a : c->args)
            if (eval_cond(a, env)) return true;
        return false;
    default:
        throw Error(ErrorCode::UnboundFreeVariable, "free boolean in a verified condition");
    }
}

inline double eval_element(const Summary& s, const NumEnv& env) {
    for (const auto& b : s.branches)
        if (eval_cond(branch_cond(b), env)) return eval_num(b.value, env);
    return eval_num(s.def, env);
}

inline int64_t eval_element_int(const Summary& s, const NumEnv& env) {
    // integer kernels evaluate exactly; value expressions are integral
    for (const auto& b : s.branches)
        if (eval_cond(branch_cond(b), env)) return llround(eval_num(b.value, env));
    return llround(eval_num(s.def, env));
}

}  // namespace verify_detail

// param values in declaration order from the verification shape
inline std::map<std::string, int64_t> bind_int_params(const ast::KernelAst& k,
                                                      const std::vector<int64_t>& shape) {
    std::map<std::string, int64_t> out;
    size_t next = 0;
    for (const auto& p : k.params) {
        if (p.kind != ast::ElemKind::Int) continue;
        if (next >= shape.size())
            throw Error(ErrorCode::ShapeMismatch,
                        "kernel has more int parameters than shape dimensions");
        out[p.name] = shape[next++];
    }
    return out;
}

inline VerificationReport verify_against_oracle(const ast::KernelAst& k, const IrModule& m,
                                                const Summary& record_post, const VerifyConfig& cfg) {
    VerificationReport rep;
    rep.kernel = k.name;
    rep.trials = cfg.trials;
    rep.shape = cfg.shape;
    rep.tolerance = cfg.tolerance;

    std::map<std::string, int64_t> int_params = bind_int_params(k, cfg.shape);
    std::vector<FieldPost> posts = split_post(m, record_post);

    // evaluate array extents
    std::map<std::string, std::vector<int64_t>> extents;
    for (const auto& a : k.arrays) {
        verify_detail::NumEnv env{nullptr, &int_params, nullptr};
        std::vector<int64_t> ext;
        for (const auto& e : a.extents) {
            int64_t v = verify_detail::eval_idx(lower_detail::lower_affine(e), env);
            if (v < 1 || v > 64)
                throw Error(ErrorCode::ShapeMismatch,
                            "extent " + std::to_string(v) + " for array '" + a.name +
                                "' outside the supported range [1, 64]");
            ext.push_back(v);
        }
        extents[a.name] = std::move(ext);
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int64_t> uni_int(0, 9);

    for (int trial = 0; trial < cfg.trials; ++trial) {
        KernelInputs in;
        in.int_params = int_params;
        for (const auto& p : k.params)
            if (p.kind == ast::ElemKind::Float) in.float_params[p.name] = uni(rng);
        for (const auto& a : k.arrays) {
            Tensor t = Tensor::zeros(a.kind, extents[a.name]);
            if (a.kind == ast::ElemKind::Float)
                for (auto& v : t.fdata) v = uni(rng);
            else
                for (auto& v : t.idata) v = uni_int(rng);
            in.arrays[a.name] = std::move(t);
        }

        std::map<std::string, Tensor> actual = interpret_kernel(k, in);

        // summary-side environment: initial arrays under their free-variable
        // names (B0 for outputs, plain names for inputs)
        std::map<std::string, Tensor> initial;
        for (const auto& a : k.arrays) initial[a.name] = in.arrays.at(a.name);
        for (const auto& f : m.outputs)
            if (f.array != "__none") initial[f.initial_sym] = in.arrays.at(f.array);

        for (const auto& fp : posts) {
            if (fp.field.array == "__none") continue;
            const Tensor& got = actual.at(fp.field.array);
            const std::vector<int64_t>& ext = extents.at(fp.field.array);
            std::vector<int64_t> pos(ext.size(), 1);
            std::map<std::string, int64_t> ivals = int_params;
            for (;;) {
                for (size_t d = 0; d < pos.size(); ++d) ivals[pos_var_name(static_cast<int>(d))] = pos[d];
                verify_detail::NumEnv env{&initial, &ivals, &in.float_params};
                if (fp.field.kind == ast::ElemKind::Float) {
                    double expect = verify_detail::eval_element(fp.post, env);
                    double have = got.fget(pos);
                    double err = std::fabs(expect - have);
                    rep.max_abs_error = std::max(rep.max_abs_error, err);
                    double rel = err / std::max(1.0, std::fabs(have));
                    if (rel > cfg.tolerance) {
                        ++rep.mismatch_count;
                        if (!rep.first_mismatch)
                            rep.first_mismatch = Mismatch{fp.field.array, pos, expect, have, trial};
                    }
                } else {
                    int64_t expect = verify_detail::eval_element_int(fp.post, env);
                    int64_t have = got.iget(pos);
                    if (expect != have) {
                        ++rep.mismatch_count;
                        if (!rep.first_mismatch)
                            rep.first_mismatch = Mismatch{fp.field.array, pos,
                                                          static_cast<double>(expect),
                                                          static_cast<double>(have), trial};
                    }
                }
                // advance the position odometer
                bool done = pos.empty();
                size_t d = pos.size();
                while (!done) {
                    if (d == 0) {
                        done = true;
                        break;
                    }
                    --d;
                    if (++pos[d] <= ext[d]) break;
                    pos[d] = 1;
                }
                if (done) break;
            }
        }
    }
    return rep;
}

}  // namespace stlift
