#pragma once

// Stage-polymorphic program representation: the guarded-substitution grammar,
// expressions, predicates, and the three path variants (Booster name paths,
// typed object paths, table-access paths). One Substitution type serves all
// pipeline stages; the stage is carried by the paths it contains.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "boosql/model.hpp"

namespace boosql {

struct Expression;
using ExprPtr = std::shared_ptr<const Expression>;

// ---------------------------------------------------------------------------
// Paths

enum class Decor { None, In, Out }; // ?-inputs and !-outputs

inline std::string decorate(const std::string& name, Decor d) {
    switch (d) {
        case Decor::In: return name + "?";
        case Decor::Out: return name + "!";
        default: return name;
    }
}

/// One dot-separated segment of a source-level path. The head segment may be
/// `this`, a bound variable or a decorated input/output name; an index suffix
/// `(e)` selects one component of a sequence-valued property.
struct BPathSeg {
    std::string name;
    Decor decor = Decor::None;
    ExprPtr index; // null unless indexed
};

struct BPath {
    std::vector<BPathSeg> segments; // nonempty
};

/// Starting reference of an object/table path; carries the base type it denotes.
struct RefStart {
    enum class Kind { This, SC, Var, Io } kind = Kind::This;
    Base base;          // type of the reference itself (element type for SC)
    IdenProperty prop;  // SC only
    ExprPtr index;      // SC only
    std::string name;   // Var/Io (decorated for Io)
};

/// Navigation target of an object path; indexed targets select one sequence
/// component.
struct OTarget {
    IdenProperty prop;
    bool indexed = false;
    ExprPtr index; // set iff indexed
};

/// Left-heavy object path, stored spine-first: start, then targets outward.
struct OPath {
    RefStart start;
    std::vector<OTarget> targets;
};

/// Which table implements one navigation step.
enum class TAccessKind { ClassT, AssocT, SetT, SeqT, SeqTC };

struct TAccess {
    TAccessKind kind = TAccessKind::ClassT;
    IdenProperty prop;
    ExprPtr index; // SeqTC only
};

struct TPath {
    RefStart start;
    std::vector<TAccess> accesses;
};

struct Path {
    std::variant<BPath, OPath, TPath> v;
};

// ---------------------------------------------------------------------------
// Expressions

enum class BinOp {
    Add, Sub, Mul,
    Eq, Ne, Lt, Le, Gt, Ge, In,
    And, Or, Implies,
};

enum class UnOp { Neg, Not };

struct IntLit { long long value = 0; };
struct StrLit { std::string value; };
struct BoolLit { bool value = false; };
struct EnumLit { std::string set; std::string member; };
struct PathExpr { Path path; };
struct Unary { UnOp op; ExprPtr arg; };
struct Binary { BinOp op; ExprPtr lhs, rhs; };
struct Card { ExprPtr arg; };
struct UnionE { ExprPtr lhs, rhs; };
struct ConcatE { ExprPtr lhs, rhs; };
struct SeqDisplay { std::vector<ExprPtr> elems; };
struct SetDisplay { std::vector<ExprPtr> elems; };
struct InsE { ExprPtr seq, index, elem; };
struct ExtentE { std::string cls; };
struct SetOfE { std::string set; };
struct UndefinedE {};

struct Expression {
    std::variant<IntLit, StrLit, BoolLit, EnumLit, PathExpr, Unary, Binary, Card,
                 UnionE, ConcatE, SeqDisplay, SetDisplay, InsE, ExtentE, SetOfE,
                 UndefinedE>
        v;
};

/// Boolean-typed expression; the distinction is enforced by the resolver.
using Predicate = Expression;

template <class T, class... Args>
ExprPtr mk_expr(Args&&... args) {
    return std::make_shared<const Expression>(Expression{T{std::forward<Args>(args)...}});
}

inline ExprPtr mk_int(long long v) { return mk_expr<IntLit>(v); }
inline ExprPtr mk_bool(bool v) { return mk_expr<BoolLit>(v); }
inline ExprPtr mk_path(Path p) { return mk_expr<PathExpr>(std::move(p)); }
inline ExprPtr mk_bin(BinOp op, ExprPtr l, ExprPtr r) {
    return mk_expr<Binary>(op, std::move(l), std::move(r));
}

// ---------------------------------------------------------------------------
// Substitutions

struct Substitution;
// SubPtr declared in model.hpp

struct Skip {};
struct Assign { Path target; ExprPtr source; };
struct Guard { ExprPtr cond; SubPtr body; };
struct Par { SubPtr lhs, rhs; };
struct SeqC { SubPtr lhs, rhs; };
struct Choice { SubPtr lhs, rhs; };
struct All { std::string var; ExprPtr range; SubPtr body; };
struct Any { std::string var; ExprPtr range; SubPtr body; };

struct Substitution {
    std::variant<Skip, Assign, Guard, Par, SeqC, Choice, All, Any> v;
};

template <class T, class... Args>
SubPtr mk_sub(Args&&... args) {
    return std::make_shared<const Substitution>(Substitution{T{std::forward<Args>(args)...}});
}

// ---------------------------------------------------------------------------
// Structural equality (deep; pointer members compared by value)

bool equal(const Expression& a, const Expression& b);
bool equal(const Substitution& a, const Substitution& b);

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}
inline bool equal(const SubPtr& a, const SubPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

inline bool equal(const RefStart& a, const RefStart& b) {
    return a.kind == b.kind && a.base == b.base && a.prop == b.prop && a.name == b.name &&
           equal(a.index, b.index);
}
inline bool equal(const OTarget& a, const OTarget& b) {
    return a.prop == b.prop && a.indexed == b.indexed && equal(a.index, b.index);
}
inline bool equal(const TAccess& a, const TAccess& b) {
    return a.kind == b.kind && a.prop == b.prop && equal(a.index, b.index);
}
inline bool equal(const BPath& a, const BPath& b) {
    if (a.segments.size() != b.segments.size()) return false;
    for (size_t i = 0; i < a.segments.size(); ++i) {
        const auto& x = a.segments[i];
        const auto& y = b.segments[i];
        if (x.name != y.name || x.decor != y.decor || !equal(x.index, y.index)) return false;
    }
    return true;
}
inline bool equal(const OPath& a, const OPath& b) {
    if (!equal(a.start, b.start) || a.targets.size() != b.targets.size()) return false;
    for (size_t i = 0; i < a.targets.size(); ++i)
        if (!equal(a.targets[i], b.targets[i])) return false;
    return true;
}
inline bool equal(const TPath& a, const TPath& b) {
    if (!equal(a.start, b.start) || a.accesses.size() != b.accesses.size()) return false;
    for (size_t i = 0; i < a.accesses.size(); ++i)
        if (!equal(a.accesses[i], b.accesses[i])) return false;
    return true;
}
inline bool equal(const Path& a, const Path& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            return equal(x, std::get<T>(b.v));
        },
        a.v);
}

namespace detail {
inline bool equal_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}
} // namespace detail

inline bool equal(const Expression& a, const Expression& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, IntLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, StrLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, BoolLit>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, EnumLit>)
                return x.set == y.set && x.member == y.member;
            else if constexpr (std::is_same_v<T, PathExpr>) return equal(x.path, y.path);
            else if constexpr (std::is_same_v<T, Unary>)
                return x.op == y.op && equal(x.arg, y.arg);
            else if constexpr (std::is_same_v<T, Binary>)
                return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, Card>) return equal(x.arg, y.arg);
            else if constexpr (std::is_same_v<T, UnionE>)
                return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, ConcatE>)
                return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, SeqDisplay>)
                return detail::equal_list(x.elems, y.elems);
            else if constexpr (std::is_same_v<T, SetDisplay>)
                return detail::equal_list(x.elems, y.elems);
            else if constexpr (std::is_same_v<T, InsE>)
                return equal(x.seq, y.seq) && equal(x.index, y.index) && equal(x.elem, y.elem);
            else if constexpr (std::is_same_v<T, ExtentE>) return x.cls == y.cls;
            else if constexpr (std::is_same_v<T, SetOfE>) return x.set == y.set;
            else return true; // UndefinedE
        },
        a.v);
}

inline bool equal(const Substitution& a, const Substitution& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, Skip>) return true;
            else if constexpr (std::is_same_v<T, Assign>)
                return equal(x.target, y.target) && equal(x.source, y.source);
            else if constexpr (std::is_same_v<T, Guard>)
                return equal(x.cond, y.cond) && equal(x.body, y.body);
            else if constexpr (std::is_same_v<T, Par> || std::is_same_v<T, SeqC> ||
                               std::is_same_v<T, Choice>)
                return equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else
                return x.var == y.var && equal(x.range, y.range) && equal(x.body, y.body);
        },
        a.v);
}

// ---------------------------------------------------------------------------
// Catamorphism over substitutions. Children arrive pre-folded; the algebra
// decides how to combine them. Analyses, collectors and the printer are all
// phrased through this.

template <class R, class Alg>
R fold_substitution(const Substitution& s, Alg&& alg) {
    return std::visit(
        [&](const auto& n) -> R {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) return alg.on_skip();
            else if constexpr (std::is_same_v<T, Assign>) return alg.on_assign(n);
            else if constexpr (std::is_same_v<T, Guard>)
                return alg.on_guard(n.cond, fold_substitution<R>(*n.body, alg));
            else if constexpr (std::is_same_v<T, Par>)
                return alg.on_par(fold_substitution<R>(*n.lhs, alg),
                                  fold_substitution<R>(*n.rhs, alg));
            else if constexpr (std::is_same_v<T, SeqC>)
                return alg.on_seq(fold_substitution<R>(*n.lhs, alg),
                                  fold_substitution<R>(*n.rhs, alg));
            else if constexpr (std::is_same_v<T, Choice>)
                return alg.on_choice(fold_substitution<R>(*n.lhs, alg),
                                     fold_substitution<R>(*n.rhs, alg));
            else if constexpr (std::is_same_v<T, All>)
                return alg.on_all(n.var, n.range, fold_substitution<R>(*n.body, alg));
            else
                return alg.on_any(n.var, n.range, fold_substitution<R>(*n.body, alg));
        },
        s.v);
}

/// Identity algebra: rebuilds the tree node by node.
struct RebuildAlgebra {
    SubPtr on_skip() const { return mk_sub<Skip>(); }
    SubPtr on_assign(const Assign& a) const { return mk_sub<Assign>(a.target, a.source); }
    SubPtr on_guard(ExprPtr c, SubPtr b) const { return mk_sub<Guard>(std::move(c), std::move(b)); }
    SubPtr on_par(SubPtr l, SubPtr r) const { return mk_sub<Par>(std::move(l), std::move(r)); }
    SubPtr on_seq(SubPtr l, SubPtr r) const { return mk_sub<SeqC>(std::move(l), std::move(r)); }
    SubPtr on_choice(SubPtr l, SubPtr r) const {
        return mk_sub<Choice>(std::move(l), std::move(r));
    }
    SubPtr on_all(const std::string& v, ExprPtr e, SubPtr b) const {
        return mk_sub<All>(v, std::move(e), std::move(b));
    }
    SubPtr on_any(const std::string& v, ExprPtr e, SubPtr b) const {
        return mk_sub<Any>(v, std::move(e), std::move(b));
    }
};

/// Walk every expression in a substitution (guards, ranges, sources, path
/// indexes of assignment targets).
inline void for_each_expr(const Substitution& s, const std::function<void(const ExprPtr&)>& f);

namespace detail {
inline void path_index_exprs(const Path& p, const std::function<void(const ExprPtr&)>& f) {
    std::visit(
        [&](const auto& q) {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, BPath>) {
                for (const auto& seg : q.segments)
                    if (seg.index) f(seg.index);
            } else if constexpr (std::is_same_v<T, OPath>) {
                if (q.start.index) f(q.start.index);
                for (const auto& t : q.targets)
                    if (t.index) f(t.index);
            } else {
                if (q.start.index) f(q.start.index);
                for (const auto& a : q.accesses)
                    if (a.index) f(a.index);
            }
        },
        p.v);
}
} // namespace detail

inline void for_each_expr(const Substitution& s, const std::function<void(const ExprPtr&)>& f) {
    struct Alg {
        const std::function<void(const ExprPtr&)>& f;
        int on_skip() const { return 0; }
        int on_assign(const Assign& a) const {
            detail::path_index_exprs(a.target, f);
            f(a.source);
            return 0;
        }
        int on_guard(ExprPtr c, int) const { f(c); return 0; }
        int on_par(int, int) const { return 0; }
        int on_seq(int, int) const { return 0; }
        int on_choice(int, int) const { return 0; }
        int on_all(const std::string&, ExprPtr e, int) const { f(e); return 0; }
        int on_any(const std::string&, ExprPtr e, int) const { f(e); return 0; }
    } alg{f};
    fold_substitution<int>(s, alg);
}

/// Recurse through an expression tree (including path index expressions).
inline void for_each_subexpr(const ExprPtr& e, const std::function<void(const Expression&)>& f) {
    if (!e) return;
    f(*e);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PathExpr>)
                detail::path_index_exprs(n.path,
                                         [&](const ExprPtr& i) { for_each_subexpr(i, f); });
            else if constexpr (std::is_same_v<T, Unary>) for_each_subexpr(n.arg, f);
            else if constexpr (std::is_same_v<T, Binary>) {
                for_each_subexpr(n.lhs, f);
                for_each_subexpr(n.rhs, f);
            } else if constexpr (std::is_same_v<T, Card>) for_each_subexpr(n.arg, f);
            else if constexpr (std::is_same_v<T, UnionE> || std::is_same_v<T, ConcatE>) {
                for_each_subexpr(n.lhs, f);
                for_each_subexpr(n.rhs, f);
            } else if constexpr (std::is_same_v<T, SeqDisplay> || std::is_same_v<T, SetDisplay>) {
                for (const auto& x : n.elems) for_each_subexpr(x, f);
            } else if constexpr (std::is_same_v<T, InsE>) {
                for_each_subexpr(n.seq, f);
                for_each_subexpr(n.index, f);
                for_each_subexpr(n.elem, f);
            }
        },
        e->v);
}

// ---------------------------------------------------------------------------
// Stage discipline. A program is Booster-, Object-, or Table-staged according
// to the path variant it uses; mixtures are rejected.

enum class Stage { None, B, O, T, Mixed };

inline Stage join_stage(Stage a, Stage b) {
    if (a == Stage::None) return b;
    if (b == Stage::None) return a;
    if (a == b) return a;
    return Stage::Mixed;
}

inline Stage stage_of(const Path& p) {
    switch (p.v.index()) {
        case 0: return Stage::B;
        case 1: return Stage::O;
        default: return Stage::T;
    }
}

inline Stage stage_of(const ExprPtr& e) {
    Stage st = Stage::None;
    for_each_subexpr(e, [&](const Expression& x) {
        if (const auto* pe = std::get_if<PathExpr>(&x.v)) st = join_stage(st, stage_of(pe->path));
    });
    return st;
}

inline Stage stage_of(const Substitution& s) {
    struct Alg {
        Stage on_skip() const { return Stage::None; }
        Stage on_assign(const Assign& a) const {
            Stage st = stage_of(a.target);
            return join_stage(st, stage_of(a.source));
        }
        Stage on_guard(ExprPtr c, Stage b) const { return join_stage(stage_of(c), b); }
        Stage on_par(Stage l, Stage r) const { return join_stage(l, r); }
        Stage on_seq(Stage l, Stage r) const { return join_stage(l, r); }
        Stage on_choice(Stage l, Stage r) const { return join_stage(l, r); }
        Stage on_all(const std::string&, ExprPtr e, Stage b) const {
            return join_stage(stage_of(e), b);
        }
        Stage on_any(const std::string&, ExprPtr e, Stage b) const {
            return join_stage(stage_of(e), b);
        }
    } alg;
    return fold_substitution<Stage>(s, alg);
}

// ---------------------------------------------------------------------------
// Small analyses used across the pipeline.

inline int count_nodes(const Substitution& s) {
    // Guard counts as two: the node plus its predicate subtree.
    struct Alg {
        int on_skip() const { return 1; }
        int on_assign(const Assign&) const { return 1; }
        int on_guard(ExprPtr, int b) const { return 2 + b; }
        int on_par(int l, int r) const { return 1 + l + r; }
        int on_seq(int l, int r) const { return 1 + l + r; }
        int on_choice(int l, int r) const { return 1 + l + r; }
        int on_all(const std::string&, ExprPtr, int b) const { return 1 + b; }
        int on_any(const std::string&, ExprPtr, int b) const { return 1 + b; }
    } alg;
    return fold_substitution<int>(s, alg);
}

inline std::vector<Path> assignment_targets(const Substitution& s) {
    using R = std::vector<Path>;
    struct Alg {
        R on_skip() const { return {}; }
        R on_assign(const Assign& a) const { return {a.target}; }
        R on_guard(ExprPtr, R b) const { return b; }
        static R merge(R l, R r) {
            for (auto& p : r) l.push_back(std::move(p));
            return l;
        }
        R on_par(R l, R r) const { return merge(std::move(l), std::move(r)); }
        R on_seq(R l, R r) const { return merge(std::move(l), std::move(r)); }
        R on_choice(R l, R r) const { return merge(std::move(l), std::move(r)); }
        R on_all(const std::string&, ExprPtr, R b) const { return b; }
        R on_any(const std::string&, ExprPtr, R b) const { return b; }
    } alg;
    return fold_substitution<R>(s, alg);
}

} // namespace boosql
