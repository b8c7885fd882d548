// Code generation: split the lifted record postcondition back into one
// summary per output array, render the canonical predicate text, and emit
// Halide-style DSL text (pure definitions with select guards).
#pragma once

#include <string>
#include <vector>

#include "stlift/ir.hpp"
#include "stlift/summary.hpp"

namespace stlift {

namespace codegen_detail {

// rewrite gets on the record-initial array to per-field initial arrays once
// the leading field index is a constant
inline sym::ExprPtr unrecord_expr(const IrModule& m, const sym::ExprPtr& e) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
    case ExprKind::Sym:
        return e;
    case ExprKind::Sum: {
        sym::ExprPtr acc = sym::constant(e->konst);
        for (const auto& t : e->terms)
            acc = sym::add(acc, sym::scale(unrecord_expr(m, t.term), t.coeff));
        return acc;
    }
    case ExprKind::Mul: {
        sym::ExprPtr acc = sym::constant(1);
        for (const auto& a : e->args) acc = sym::mul(acc, unrecord_expr(m, a));
        return acc;
    }
    case ExprKind::Div:
        return sym::div(unrecord_expr(m, e->args[0]), unrecord_expr(m, e->args[1]));
    case ExprKind::Mod:
        return sym::mod(unrecord_expr(m, e->args[0]), unrecord_expr(m, e->args[1]));
    case ExprKind::Get: {
        std::vector<sym::ExprPtr> idx;
        for (const auto& a : e->args) idx.push_back(unrecord_expr(m, a));
        if (m.has_field_dim && e->name == "$out0") {
            auto f = sym::const_val(idx[0]);
            if (!f || !f->is_integer())
                throw Error(ErrorCode::UnrepresentableBranch,
                            "record read with a non-constant field coordinate");
            const OutputField& field = m.outputs[static_cast<size_t>(f->as_integer())];
            std::vector<sym::ExprPtr> rest(idx.begin() + 1, idx.begin() + 1 + field.rank);
            return sym::get(field.initial_sym, std::move(rest));
        }
        return sym::get(e->name, std::move(idx));
    }
    }
    return e;
}

}  // namespace codegen_detail

// One output array's postcondition, extracted from the record summary.
struct FieldPost {
    OutputField field;
    Summary post;  // rank = field.rank, subject = the array
};

inline std::vector<FieldPost> split_post(const IrModule& m, const Summary& record_post) {
    std::vector<FieldPost> out;
    for (size_t f = 0; f < m.outputs.size(); ++f) {
        const OutputField& field = m.outputs[f];
        Summary s;
        s.subject = Summary::Subject::Array;
        s.array = field.array;
        s.rank = field.rank;

        // flatten write metadata into conditions first, then select the field
        // and shift position variables down by one
        Summary flat = record_post;
        for (auto& b : flat.branches) {
            b.guard = branch_cond(b);
            b.write = std::nullopt;
        }
        sym::SymSubst sel;
        if (m.has_field_dim) {
            sel[pos_var_name(0)] = sym::constant(static_cast<int64_t>(f));
            for (int d = 0; d < field.rank; ++d) sel[pos_var_name(d + 1)] = pos_var(d);
            // padded trailing dims are pinned to 1
            for (int d = field.rank + 1; d < m.record_rank; ++d)
                sel[pos_var_name(d)] = sym::constant(1);
        }
        Summary picked = m.has_field_dim ? summary_substitute(flat, sel) : flat;
        for (const auto& b : picked.branches) {
            CondPtr c = branch_cond(b);
            if (c->kind == sym::CondKind::False) continue;
            Branch nb;
            nb.guard = c;  // write metadata was consumed by the substitution
            nb.write = std::nullopt;
            nb.value = codegen_detail::unrecord_expr(m, b.value);
            s.branches.push_back(std::move(nb));
        }
        s.def = codegen_detail::unrecord_expr(m, picked.def);
        drop_false_branches(s);
        sort_branches(s);
        out.push_back({field, std::move(s)});
    }
    return out;
}

// canonical human-readable predicate text, one branch per line
inline std::string emit_summary(const IrModule& m, const Summary& record_post) {
    std::string out;
    for (const auto& fp : split_post(m, record_post)) {
        out += summary_str(fp.post, fp.field.array);
    }
    return out;
}

namespace codegen_detail {

inline std::string dsl_expr(const sym::ExprPtr& e);

inline std::string dsl_sum(const sym::Expr& e) {
    std::string out;
    bool first = true;
    auto emit_piece = [&](bool negative, const std::string& text) {
        if (first) {
            if (negative) out += "-";
            out += text;
            first = false;
        } else {
            out += negative ? " - " : " + ";
            out += text;
        }
    };
    for (const auto& t : e.terms) {
        Rational c = t.coeff;
        bool neg = c.sign() < 0;
        Rational mag = neg ? -c : c;
        std::string txt = mag == Rational(1) ? dsl_expr(t.term)
                                             : mag.decimal_str() + "f * " + dsl_expr(t.term);
        emit_piece(neg, txt);
    }
    if (!e.konst.is_zero() || first)
        emit_piece(e.konst.sign() < 0,
                   (e.konst.sign() < 0 ? -e.konst : e.konst).decimal_str() +
                       (e.konst.is_integer() ? "" : "f"));
    return out;
}

inline std::string dsl_expr(const sym::ExprPtr& e) {
    using sym::ExprKind;
    switch (e->kind) {
    case ExprKind::Const:
        return e->value.decimal_str() + (e->value.is_integer() ? "" : "f");
    case ExprKind::Sym:
        return render_positions(e->name);
    case ExprKind::Sum:
        return "(" + dsl_sum(*e) + ")";
    case ExprKind::Mul: {
        std::string out;
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) out += " * ";
            out += dsl_expr(e->args[i]);
        }
        return out;
    }
    case ExprKind::Div:
        return dsl_expr(e->args[0]) + " / " + dsl_expr(e->args[1]);
    case ExprKind::Mod:
        return "(" + dsl_expr(e->args[0]) + ") % " + dsl_expr(e->args[1]);
    case ExprKind::Get: {
        std::string out = e->name + "(";
        for (size_t i = 0; i < e->args.size(); ++i) {
            if (i) out += ", ";
            std::string ix = dsl_expr(e->args[i]);
            // strip the redundant parens a sum introduces at argument position
            if (ix.size() > 1 && ix.front() == '(' && ix.back() == ')')
                ix = ix.substr(1, ix.size() - 2);
            out += ix;
        }
        return out + ")";
    }
    }
    return "?";
}

inline std::string dsl_cond(const CondPtr& c) {
    using sym::CondKind;
    switch (c->kind) {
    case CondKind::True: return "true";
    case CondKind::False: return "false";
    case CondKind::BoolSym:
    case CondKind::NotSym:
        throw Error(ErrorCode::UnrepresentableBranch,
                    "free boolean input '" + c->name + "' has no DSL analogue");
    case CondKind::Cmp: {
        // two-sided rendering as in cond_str, with C operators
        std::string text = render_positions(sym::cond_str(c));
        std::string out;
        for (size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '=') {
                out += "!=";
                ++i;
            } else {
                out += text[i];
            }
        }
        return out;
    }
    case CondKind::And: {
        std::string out;
        for (size_t i = 0; i < c->args.size(); ++i) {
            if (i) out += " && ";
            bool paren = c->args[i]->kind == CondKind::Or;
            out += paren ? "(" + dsl_cond(c->args[i]) + ")" : dsl_cond(c->args[i]);
        }
        return out;
    }
    case CondKind::Or: {
        std::string out;
        for (size_t i = 0; i < c->args.size(); ++i) {
            if (i) out += " || ";
            bool paren = c->args[i]->kind == CondKind::And;
            out += paren ? "(" + dsl_cond(c->args[i]) + ")" : dsl_cond(c->args[i]);
        }
        return out;
    }
    }
    return "?";
}

}  // namespace codegen_detail

// Halide-style text: one pure function definition per output array, guards
// rendered as a flat select chain.
inline std::string emit_dsl(const IrModule& m, const Summary& record_post) {
    std::vector<FieldPost> fields = split_post(m, record_post);
    int max_rank = 0;
    for (const auto& fp : fields) max_rank = std::max(max_rank, fp.field.rank);

    std::string out;
    out += "// " + m.kernel + ": generated stencil definition\n";
    out += "Var ";
    for (int d = 0; d < std::max(max_rank, 1); ++d) {
        if (d) out += ", ";
        out += "x" + std::to_string(d + 1);
    }
    out += ";\n";
    for (const auto& fp : fields) out += "Func " + fp.field.array + ";\n";
    for (const auto& fp : fields) {
        std::string head = fp.field.array + "(";
        for (int d = 0; d < fp.field.rank; ++d) {
            if (d) head += ", ";
            head += "x" + std::to_string(d + 1);
        }
        head += ")";
        std::string rhs;
        std::string def = codegen_detail::dsl_expr(fp.post.def);
        if (def.size() > 1 && def.front() == '(' && def.back() == ')')
            def = def.substr(1, def.size() - 2);
        if (fp.post.branches.empty()) {
            rhs = def;
        } else {
            rhs = "select(";
            for (const auto& b : fp.post.branches) {
                std::string val = codegen_detail::dsl_expr(b.value);
                if (val.size() > 1 && val.front() == '(' && val.back() == ')')
                    val = val.substr(1, val.size() - 2);
                rhs += codegen_detail::dsl_cond(branch_cond(b)) + ",\n" +
                       std::string(head.size() + 10, ' ') + val + ",\n" +
                       std::string(head.size() + 10, ' ');
            }
            rhs += def + ")";
        }
        out += head + " = " + rhs + ";\n";
    }
    return out;
}

}  // namespace stlift
