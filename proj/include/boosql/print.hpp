#pragma once

// Pretty-printer emitting the frontend grammar. Canonical output: card(...)
// for cardinality, minimal parentheses mirroring the parser's precedence.

#include <sstream>
#include <string>

#include "boosql/gsl.hpp"

namespace boosql {

namespace printing {

// Expression precedence, loosest first.
inline int expr_level(const Expression& e) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Binary>) {
                switch (n.op) {
                    case BinOp::Implies: return 1;
                    case BinOp::Or: return 2;
                    case BinOp::And: return 3;
                    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le:
                    case BinOp::Gt: case BinOp::Ge: case BinOp::In: return 4;
                    case BinOp::Add: case BinOp::Sub: return 5;
                    case BinOp::Mul: return 6;
                }
                return 8;
            } else if constexpr (std::is_same_v<T, UnionE> || std::is_same_v<T, ConcatE>)
                return 5;
            else if constexpr (std::is_same_v<T, Unary>)
                return 7;
            else
                return 8;
        },
        e.v);
}

inline const char* binop_token(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Eq: return "=";
        case BinOp::Ne: return "/=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::In: return ":";
        case BinOp::And: return "&";
        case BinOp::Or: return "or";
        case BinOp::Implies: return "=>";
    }
    return "?";
}

} // namespace printing

std::string print_expr(const ExprPtr& e);

/// Source-level rendering of any path stage: `m?.reservations`, `reservations`
/// (implicit this), `qs(2)`. Also used for cache naming in the backend.
inline std::string print_path(const Path& p) {
    std::ostringstream os;
    auto seg = [&](const std::string& name, const ExprPtr& index, bool first) {
        if (!first) os << ".";
        os << name;
        if (index) os << "(" << print_expr(index) << ")";
    };
    auto start_ref = [&](const RefStart& r) -> bool {
        // Returns whether a head token was printed.
        switch (r.kind) {
            case RefStart::Kind::This: return false; // implicit
            case RefStart::Kind::SC:
                seg(r.prop.prop, r.index, true);
                return true;
            case RefStart::Kind::Var:
            case RefStart::Kind::Io:
                seg(r.name, nullptr, true);
                return true;
        }
        return false;
    };
    std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, BPath>) {
                bool first = true;
                for (const auto& s : q.segments) {
                    seg(decorate(s.name, s.decor), s.index, first);
                    first = false;
                }
            } else if constexpr (std::is_same_v<T, OPath>) {
                bool printed = start_ref(q.start);
                for (const auto& t : q.targets) {
                    seg(t.prop.prop, t.indexed ? t.index : nullptr, !printed);
                    printed = true;
                }
            } else {
                bool printed = start_ref(q.start);
                for (const auto& a : q.accesses) {
                    seg(a.prop.prop, a.kind == TAccessKind::SeqTC ? a.index : nullptr, !printed);
                    printed = true;
                }
            }
        },
        p.v);
    std::string out = os.str();
    return out.empty() ? "this" : out;
}

namespace printing {
inline void print_expr_rec(std::ostringstream& os, const Expression& e, int level);

inline void child(std::ostringstream& os, const ExprPtr& e, int level) {
    int el = expr_level(*e);
    bool parens = el < level;
    if (parens) os << "(";
    print_expr_rec(os, *e, el);
    if (parens) os << ")";
}

inline void list(std::ostringstream& os, const std::vector<ExprPtr>& xs, int level = 1) {
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ", ";
        child(os, xs[i], level);
    }
}

inline void print_expr_rec(std::ostringstream& os, const Expression& e, int level) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLit>) os << n.value;
            else if constexpr (std::is_same_v<T, StrLit>) os << '"' << n.value << '"';
            else if constexpr (std::is_same_v<T, BoolLit>) os << (n.value ? "true" : "false");
            else if constexpr (std::is_same_v<T, EnumLit>) os << n.set << "." << n.member;
            else if constexpr (std::is_same_v<T, PathExpr>) os << print_path(n.path);
            else if constexpr (std::is_same_v<T, Unary>) {
                os << (n.op == UnOp::Neg ? "-" : "not ");
                child(os, n.arg, 7);
            } else if constexpr (std::is_same_v<T, Binary>) {
                bool right_assoc = n.op == BinOp::Implies;
                child(os, n.lhs, right_assoc ? level + 1 : level);
                os << " " << binop_token(n.op) << " ";
                // Comparisons are non-associative: force parens on nested ones.
                child(os, n.rhs, (right_assoc || level == 4) ? level : level + 1);
            } else if constexpr (std::is_same_v<T, Card>) {
                os << "card(";
                child(os, n.arg, 1);
                os << ")";
            } else if constexpr (std::is_same_v<T, UnionE>) {
                child(os, n.lhs, level);
                os << " \\/ ";
                child(os, n.rhs, level + 1);
            } else if constexpr (std::is_same_v<T, ConcatE>) {
                child(os, n.lhs, level);
                os << " ^ ";
                child(os, n.rhs, level + 1);
            } else if constexpr (std::is_same_v<T, SeqDisplay>) {
                os << "< ";
                list(os, n.elems, 5); // display elements bind above comparisons
                os << (n.elems.empty() ? ">" : " >");
            } else if constexpr (std::is_same_v<T, SetDisplay>) {
                os << "{ ";
                list(os, n.elems, 5);
                os << (n.elems.empty() ? "}" : " }");
            } else if constexpr (std::is_same_v<T, InsE>) {
                os << "ins(";
                child(os, n.seq, 1);
                os << ", ";
                child(os, n.index, 1);
                os << ", ";
                child(os, n.elem, 1);
                os << ")";
            } else if constexpr (std::is_same_v<T, ExtentE>) os << "extent(" << n.cls << ")";
            else if constexpr (std::is_same_v<T, SetOfE>) os << "set(" << n.set << ")";
            else os << "undefined";
        },
        e.v);
}
} // namespace printing

inline std::string print_expr(const ExprPtr& e) {
    std::ostringstream os;
    printing::print_expr_rec(os, *e, 1);
    return os.str();
}

// Substitution precedence: ; (1) < [] (2) < ==> and quantifiers (3) < || (4).
namespace printing {
inline int sub_level(const Substitution& s) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SeqC>) return 1;
            else if constexpr (std::is_same_v<T, Choice>) return 2;
            else if constexpr (std::is_same_v<T, Guard> || std::is_same_v<T, All> ||
                               std::is_same_v<T, Any>)
                return 3;
            else if constexpr (std::is_same_v<T, Par>) return 4;
            else return 5;
        },
        s.v);
}

inline void print_sub_rec(std::ostringstream& os, const Substitution& s, int level);

inline void sub_child(std::ostringstream& os, const SubPtr& s, int level) {
    int sl = sub_level(*s);
    bool parens = sl < level;
    if (parens) os << "(";
    print_sub_rec(os, *s, sl);
    if (parens) os << ")";
}

inline void print_sub_rec(std::ostringstream& os, const Substitution& s, int level) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) os << "skip";
            else if constexpr (std::is_same_v<T, Assign>)
                os << print_path(n.target) << " := " << print_expr(n.source);
            else if constexpr (std::is_same_v<T, Guard>) {
                os << print_expr(n.cond) << " ==> ";
                sub_child(os, n.body, 3); // right-associative
            } else if constexpr (std::is_same_v<T, Par>) {
                sub_child(os, n.lhs, level);
                os << " || ";
                sub_child(os, n.rhs, level + 1);
            } else if constexpr (std::is_same_v<T, SeqC>) {
                sub_child(os, n.lhs, level);
                os << " ; ";
                sub_child(os, n.rhs, level + 1);
            } else if constexpr (std::is_same_v<T, Choice>) {
                sub_child(os, n.lhs, level);
                os << " [] ";
                sub_child(os, n.rhs, level + 1);
            } else if constexpr (std::is_same_v<T, All>) {
                os << "! " << n.var << " : " << print_expr(n.range) << " @ ";
                sub_child(os, n.body, 3);
            } else {
                os << "@ " << n.var << " : " << print_expr(n.range) << " @ ";
                sub_child(os, n.body, 3);
            }
        },
        s.v);
}
} // namespace printing

inline std::string print_substitution(const Substitution& s) {
    std::ostringstream os;
    printing::print_sub_rec(os, s, 1);
    return os.str();
}
inline std::string print_substitution(const SubPtr& s) { return print_substitution(*s); }

inline std::string print_typeref(const PropertyDecl& p) {
    std::string t = p.opposite ? p.opposite->cls + "." + p.opposite->prop : base_str(p.target);
    switch (p.kind) {
        case PropKind::Optional: return "[" + t + "]";
        case PropKind::One: return t;
        case PropKind::Set: return "set(" + t + ") *";
        case PropKind::Seq: return "seq(" + t + ") *";
    }
    return t;
}

inline std::string print_model(const BoosterModel& m) {
    std::ostringstream os;
    for (const auto& vs : m.value_sets) {
        os << "set " << vs.name << " { ";
        for (size_t i = 0; i < vs.members.size(); ++i) {
            if (i) os << ", ";
            os << vs.members[i];
        }
        os << (vs.members.empty() ? "}" : " }") << "\n";
    }
    for (const auto& c : m.classes) {
        os << "class " << c.name << " {\n";
        if (!c.properties.empty()) {
            os << "  attributes\n";
            for (const auto& p : c.properties)
                os << "    " << p.name << " : " << print_typeref(p) << "\n";
        }
        if (!c.operations.empty()) {
            os << "  operations\n";
            for (const auto& op : c.operations)
                os << "    " << op.name << " { " << print_substitution(op.body) << " }\n";
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace boosql
