#pragma once

// Table-stage GSL → SQL compilation: expression translation, the assignment
// pattern matrix, guard/iterator/parallel compilation and caching-variable
// management. Parallel composition materialises every read into a cache
// first (temp tables for multi-valued paths, declared variables for
// single-valued ones), then runs the branch statements sequentially.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "boosql/sql.hpp"
#include "boosql/tables.hpp"

namespace boosql {

enum class GuardMode { Skip, Signal };

/// Deliberate backend defects, used by the mutation-sensitivity harness.
enum class Mutation {
    None,
    DropIndexShift,    // pattern 23: omit the index-shifting UPDATE
    SwapInsertUpdate,  // pattern 23: INSERT before the shift
    SkipOppositeWrite, // pattern 23: leave the opposite-end column NULL
    OffByOneVariant,   // loops: start the variant one too low
    OmitCacheRefresh,  // loops: skip the in-loop cache refresh
};

struct CompileOptions {
    GuardMode guard_mode = GuardMode::Skip;
    Mutation mutation = Mutation::None;
};

struct CacheEntry {
    enum class Kind { TempTable, Var } kind = Kind::Var;
    std::string column; // projected column, for temp tables
};

struct CompileCtx {
    const TableModel* tm = nullptr;
    std::string ctx_class;
    const TypingEnv* env = nullptr;
    CompileOptions options;
    std::map<std::string, CacheEntry> caches; // path key -> cache
    std::vector<std::pair<std::string, std::string>> created; // (name!, class)

    // per-procedure state, shared across the recursion
    sql::Stmts* declarations = nullptr;
    int* fresh_counter = nullptr;
    std::set<std::string>* cells = nullptr;

    std::string fresh_var() {
        int n = (*fresh_counter)++;
        return n == 0 ? "x" : "x" + std::to_string(n - 1);
    }
    void hit(const std::string& cell) const {
        if (cells) cells->insert(cell);
    }
    const BoosterModel& model() const { return tm->source; }
};

namespace backend {

using namespace sql;

inline std::string path_key(const TPath& tp) { return print_path(Path{tp}); }

inline const PropertyDecl& prop_of(const CompileCtx& ctx, const IdenProperty& ip) {
    const PropertyDecl* pd = ctx.model().find_property(ip.cls, ip.prop);
    if (!pd) throw CompileError("unknown property " + ip.cls + "." + ip.prop);
    return *pd;
}

inline bool io_is_collection(const CompileCtx& ctx, const std::string& name) {
    if (!ctx.env) return false;
    auto it = ctx.env->io.find(name);
    return it != ctx.env->io.end() && it->second.is_collection_type();
}

/// Final-value multiplicity of a table path.
inline PropKind tpath_kind(const CompileCtx& ctx, const TPath& tp) {
    if (tp.accesses.empty()) {
        if (tp.start.kind == RefStart::Kind::Io && io_is_collection(ctx, tp.start.name))
            return ctx.env->io.at(tp.start.name).kind;
        return PropKind::One;
    }
    const TAccess& last = tp.accesses.back();
    if (last.kind == TAccessKind::SeqTC) return PropKind::One;
    return prop_of(ctx, last.prop).kind;
}

inline bool is_collection_path(const CompileCtx& ctx, const TPath& tp) {
    return is_collection(tpath_kind(ctx, tp));
}

SqlExprPtr to_sql_expr(const CompileCtx& ctx, const ExprPtr& e);

inline TPath tpath_prefix(const TPath& tp) {
    TPath p = tp;
    p.accesses.pop_back();
    return p;
}

/// Scalar value of a single-valued table path, as a (possibly nested) SELECT.
/// The longest cache-variable prefix substitutes for its sub-path, so later
/// navigations reuse cached values directly.
inline SqlExprPtr scalar_path_expr(const CompileCtx& ctx, const TPath& tp) {
    if (auto it = ctx.caches.find(path_key(tp));
        it != ctx.caches.end() && it->second.kind == CacheEntry::Kind::Var)
        return name(path_key(tp));
    for (size_t cut = tp.accesses.size(); cut-- > 1;) {
        TPath pre = tp;
        pre.accesses.resize(cut);
        std::string key = path_key(pre);
        auto it = ctx.caches.find(key);
        if (it != ctx.caches.end() && it->second.kind == CacheEntry::Kind::Var) {
            TPath rebased;
            rebased.start = {RefStart::Kind::Var, {}, {}, nullptr, key};
            rebased.accesses.assign(tp.accesses.begin() + static_cast<long>(cut),
                                    tp.accesses.end());
            return scalar_path_expr(ctx, rebased);
        }
    }

    if (tp.accesses.empty()) {
        switch (tp.start.kind) {
            case RefStart::Kind::This: return name("this?");
            case RefStart::Kind::Io: return name(tp.start.name);
            case RefStart::Kind::Var: return name(tp.start.name);
            case RefStart::Kind::SC: {
                const PropertyDecl& pd = prop_of(ctx, tp.start.prop);
                SqlExprPtr idx = to_sql_expr(ctx, tp.start.index);
                if (pd.opposite) {
                    const AssocTable* at = ctx.tm->assoc_for(tp.start.prop);
                    SelectExpr sel;
                    sel.proj = {Projection::Kind::Col, tp.start.prop.prop};
                    sel.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                    sel.where = bin(SqlBinOp::And,
                                    bin(SqlBinOp::Eq, name(at->other_end(tp.start.prop).prop),
                                        name("this?")),
                                    bin(SqlBinOp::Eq, name("index"), idx));
                    return mk<SelectExpr>(sel);
                }
                const ElementTable* et = ctx.tm->element_for(tp.start.prop);
                SelectExpr sel;
                sel.proj = {Projection::Kind::Col, tp.start.prop.prop};
                sel.from = {FromClause::Kind::Table, et->name, nullptr, {}};
                sel.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("oid"), name("this?")),
                                bin(SqlBinOp::Eq, name("index"), idx));
                return mk<SelectExpr>(sel);
            }
        }
    }

    std::string key = path_key(tp);
    const TAccess& last = tp.accesses.back();
    SqlExprPtr owner = scalar_path_expr(ctx, tpath_prefix(tp));
    SelectExpr sel;
    switch (last.kind) {
        case TAccessKind::ClassT:
            sel.proj = {Projection::Kind::Col, last.prop.prop};
            sel.from = {FromClause::Kind::Table, last.prop.cls, nullptr, {}};
            sel.where = bin(SqlBinOp::Eq, name("oid"), owner);
            return mk<SelectExpr>(sel);
        case TAccessKind::AssocT: {
            const PropertyDecl& pd = prop_of(ctx, last.prop);
            if (is_collection(pd.kind))
                throw CompileError("collection-valued path in scalar position: " + key);
            const AssocTable* at = ctx.tm->assoc_for(last.prop);
            sel.proj = {Projection::Kind::Col, last.prop.prop};
            sel.from = {FromClause::Kind::Table, at->name, nullptr, {}};
            sel.where = bin(SqlBinOp::Eq, name(at->other_end(last.prop).prop), owner);
            return mk<SelectExpr>(sel);
        }
        case TAccessKind::SeqTC: {
            const PropertyDecl& pd = prop_of(ctx, last.prop);
            SqlExprPtr idx = to_sql_expr(ctx, last.index);
            if (pd.opposite) {
                const AssocTable* at = ctx.tm->assoc_for(last.prop);
                sel.proj = {Projection::Kind::Col, last.prop.prop};
                sel.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                sel.where =
                    bin(SqlBinOp::And,
                        bin(SqlBinOp::Eq, name(at->other_end(last.prop).prop), owner),
                        bin(SqlBinOp::Eq, name("index"), idx));
            } else {
                const ElementTable* et = ctx.tm->element_for(last.prop);
                sel.proj = {Projection::Kind::Col, last.prop.prop};
                sel.from = {FromClause::Kind::Table, et->name, nullptr, {}};
                sel.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("oid"), owner),
                                bin(SqlBinOp::Eq, name("index"), idx));
            }
            return mk<SelectExpr>(sel);
        }
        default:
            throw CompileError("collection-valued path in scalar position: " + key);
    }
    throw CompileError("unreachable path case");
}

/// SELECT producing the element column of a collection-valued path.
/// `use_cache` = false forces a live read (used when refreshing a cache).
inline SelectExpr collection_select(const CompileCtx& ctx, const TPath& tp,
                                    bool use_cache = true) {
    std::string key = path_key(tp);
    if (use_cache) {
        if (auto it = ctx.caches.find(key);
            it != ctx.caches.end() && it->second.kind == CacheEntry::Kind::TempTable) {
            SelectExpr sel;
            sel.proj = {Projection::Kind::Col, it->second.column};
            sel.from = {FromClause::Kind::Table, key, nullptr, {}};
            sel.where = truth();
            return sel;
        }
    }
    if (tp.accesses.empty()) {
        // a collection-valued input, materialised as a one-column table
        if (tp.start.kind == RefStart::Kind::Io && io_is_collection(ctx, tp.start.name)) {
            SelectExpr sel;
            sel.proj = {Projection::Kind::Star, {}};
            sel.from = {FromClause::Kind::Table, tp.start.name, nullptr, {}};
            sel.where = truth();
            return sel;
        }
        throw CompileError("'" + key + "' is not a collection");
    }
    const TAccess& last = tp.accesses.back();
    const PropertyDecl& pd = prop_of(ctx, last.prop);
    if (!is_collection(pd.kind) || last.kind == TAccessKind::SeqTC)
        throw CompileError("'" + key + "' is not a collection");
    SqlExprPtr owner = scalar_path_expr(ctx, tpath_prefix(tp));
    SelectExpr sel;
    sel.proj = {Projection::Kind::Col, last.prop.prop};
    if (last.kind == TAccessKind::AssocT) {
        const AssocTable* at = ctx.tm->assoc_for(last.prop);
        sel.from = {FromClause::Kind::Table, at->name, nullptr, {}};
        sel.where = bin(SqlBinOp::Eq, name(at->other_end(last.prop).prop), owner);
    } else {
        const ElementTable* et = ctx.tm->element_for(last.prop);
        sel.from = {FromClause::Kind::Table, et->name, nullptr, {}};
        sel.where = bin(SqlBinOp::Eq, name("oid"), owner);
    }
    return sel;
}

/// COUNT over a collection path or input: the path's own SELECT becomes
/// the FROM source of the counting query.
inline SqlExprPtr count_expr(const CompileCtx& ctx, const TPath& tp) {
    if (tp.accesses.empty()) {
        // COUNT(*) directly over the input table
        SelectExpr sel;
        sel.proj = {Projection::Kind::CountStar, {}};
        sel.from = {FromClause::Kind::Table, tp.start.name, nullptr, {}};
        sel.where = truth();
        return mk<SelectExpr>(sel);
    }
    SelectExpr inner = collection_select(ctx, tp);
    SelectExpr sel;
    sel.proj = {Projection::Kind::CountCol, "oid"};
    sel.from = {FromClause::Kind::Sub, {}, std::make_shared<const SelectExpr>(inner),
                tp.accesses.back().prop.prop};
    sel.where = truth();
    return mk<SelectExpr>(sel);
}

inline const TPath& expect_tpath(const ExprPtr& e, const char* what) {
    const auto* pe = std::get_if<PathExpr>(&e->v);
    if (!pe) throw CompileError(std::string("expected a path as ") + what);
    const auto* tp = std::get_if<TPath>(&pe->path.v);
    if (!tp) throw CompileError(std::string(what) + " is not Table-staged");
    return *tp;
}

inline SqlExprPtr to_sql_expr(const CompileCtx& ctx, const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> SqlExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLit>) return lit(n.value);
            else if constexpr (std::is_same_v<T, StrLit>) return str(n.value);
            else if constexpr (std::is_same_v<T, BoolLit>) return truth(n.value);
            else if constexpr (std::is_same_v<T, EnumLit>) return str(n.member);
            else if constexpr (std::is_same_v<T, UndefinedE>) return null();
            else if constexpr (std::is_same_v<T, PathExpr>) {
                const auto* tp = std::get_if<TPath>(&n.path.v);
                if (!tp) throw CompileError("expression is not Table-staged");
                if (is_collection_path(ctx, *tp))
                    throw CompileError("collection path '" + path_key(*tp) +
                                       "' used in scalar position");
                return scalar_path_expr(ctx, *tp);
            } else if constexpr (std::is_same_v<T, boosql::Unary>) {
                return mk<sql::Unary>(n.op == UnOp::Not ? SqlUnOp::Not : SqlUnOp::Neg,
                                      to_sql_expr(ctx, n.arg));
            } else if constexpr (std::is_same_v<T, boosql::Binary>) {
                auto direct = [&](SqlBinOp op) {
                    return bin(op, to_sql_expr(ctx, n.lhs), to_sql_expr(ctx, n.rhs));
                };
                switch (n.op) {
                    case BinOp::Add: return direct(SqlBinOp::Add);
                    case BinOp::Sub: return direct(SqlBinOp::Sub);
                    case BinOp::Mul: return direct(SqlBinOp::Mul);
                    case BinOp::Eq: return direct(SqlBinOp::Eq);
                    case BinOp::Ne: return direct(SqlBinOp::Ne);
                    case BinOp::Lt: return direct(SqlBinOp::Lt);
                    case BinOp::Le: return direct(SqlBinOp::Le);
                    case BinOp::Gt: return direct(SqlBinOp::Gt);
                    case BinOp::Ge: return direct(SqlBinOp::Ge);
                    case BinOp::And: return direct(SqlBinOp::And);
                    case BinOp::Or: return direct(SqlBinOp::Or);
                    case BinOp::Implies:
                        return bin(SqlBinOp::Or,
                                   mk<sql::Unary>(SqlUnOp::Not, to_sql_expr(ctx, n.lhs)),
                                   to_sql_expr(ctx, n.rhs));
                    case BinOp::In: {
                        // membership: x : extent(C) / x : set(S) / x : path
                        if (std::holds_alternative<SetOfE>(n.rhs->v))
                            return truth(); // checked statically by the resolver
                        SqlExprPtr x = to_sql_expr(ctx, n.lhs);
                        if (const auto* ex = std::get_if<ExtentE>(&n.rhs->v)) {
                            SelectExpr sel;
                            sel.proj = {Projection::Kind::CountCol, "oid"};
                            sel.from = {FromClause::Kind::Table, ex->cls, nullptr, {}};
                            sel.where = bin(SqlBinOp::Eq, name("oid"), x);
                            return bin(SqlBinOp::Gt, mk<SelectExpr>(sel), lit(0));
                        }
                        const TPath& tp = expect_tpath(n.rhs, "membership range");
                        if (tp.accesses.empty()) {
                            SelectExpr sel;
                            sel.proj = {Projection::Kind::CountStar, {}};
                            sel.from = {FromClause::Kind::Table, tp.start.name, nullptr, {}};
                            sel.where = bin(SqlBinOp::Eq, name("value"), x);
                            return bin(SqlBinOp::Gt, mk<SelectExpr>(sel), lit(0));
                        }
                        SelectExpr inner = collection_select(ctx, tp);
                        std::string col = inner.proj.col;
                        SelectExpr sel;
                        sel.proj = {Projection::Kind::CountCol, "oid"};
                        sel.from = {FromClause::Kind::Sub, {},
                                    std::make_shared<const SelectExpr>(inner), col};
                        sel.where = bin(SqlBinOp::Eq, name(col), x);
                        return bin(SqlBinOp::Gt, mk<SelectExpr>(sel), lit(0));
                    }
                }
                throw CompileError("unreachable operator");
            } else if constexpr (std::is_same_v<T, Card>) {
                if (const auto* ex = std::get_if<ExtentE>(&n.arg->v)) {
                    SelectExpr sel;
                    sel.proj = {Projection::Kind::CountCol, "oid"};
                    sel.from = {FromClause::Kind::Table, ex->cls, nullptr, {}};
                    sel.where = truth();
                    return mk<SelectExpr>(sel);
                }
                const auto* pe = std::get_if<PathExpr>(&n.arg->v);
                if (!pe)
                    throw CompileError(
                        "card(...) over a non-path needs materialisation; unsupported");
                const auto* tp = std::get_if<TPath>(&pe->path.v);
                if (!tp) throw CompileError("card(...) argument is not Table-staged");
                return count_expr(ctx, *tp);
            } else {
                throw CompileError(
                    "collection constructor in scalar position; unsupported construct");
            }
        },
        e->v);
}

// Spec-level entry points over a bare table model.
inline SqlExprPtr to_sql_expr(const TableModel& tm, const ExprPtr& e) {
    CompileCtx ctx;
    ctx.tm = &tm;
    return to_sql_expr(ctx, e);
}

} // namespace backend

using backend::to_sql_expr;

// ---------------------------------------------------------------------------
// Assignment pattern matrix

namespace backend {

struct MatrixKey {
    std::string target_kind;   // class-scalar | optional | one | set | seq | output | seq-at
    std::string opposite_kind; // none | optional | one | set | seq
    std::string update_shape;  // overwrite | insert-element | remove-element | union | concat
};

[[noreturn]] inline void unimplemented(const MatrixKey& k) {
    throw CompileError("unimplemented assignment pattern (" + k.target_kind + ", " +
                       k.opposite_kind + ", " + k.update_shape + ")");
}

/// Shared cursor-loop skeleton: DECLARE bound/variant/cursor at the top,
/// then OPEN/FETCH, COUNT INTO variant, WHILE variant > 0 with a final
/// FETCH and variant decrement.
inline Stmts make_loop(CompileCtx& ctx, const std::string& var, const std::string& elem_type,
                       const SelectExpr& cursor_sel, const SelectInto& count_into,
                       const Stmts& body, const std::vector<TPath>& refresh_paths) {
    std::string variant = var + "_variant";
    std::string cursor = var + "_cursor";
    ctx.declarations->push_back({DeclareVar{var, elem_type}});
    ctx.declarations->push_back({DeclareVar{variant, "INTEGER"}});
    ctx.declarations->push_back({DeclareCursor{cursor, cursor_sel}});

    Stmts out;
    out.push_back({OpenCursor{cursor}});
    out.push_back({FetchInto{cursor, var}});
    out.push_back({count_into});
    if (ctx.options.mutation == Mutation::OffByOneVariant)
        out.push_back({SetVar{variant, bin(SqlBinOp::Sub, name(variant), lit(1))}});

    Stmts loop;
    if (ctx.options.mutation != Mutation::OmitCacheRefresh) {
        for (const auto& rp : refresh_paths) {
            std::string key = path_key(rp);
            loop.push_back({DropTempTable{key}});
            loop.push_back({CreateTempTableAs{key, collection_select(ctx, rp, false)}});
        }
    }
    for (const auto& s : body) loop.push_back(s);
    loop.push_back({FetchInto{cursor, var}});
    loop.push_back({SetVar{variant, bin(SqlBinOp::Sub, name(variant), lit(1))}});
    out.push_back(while_stmt(bin(SqlBinOp::Gt, name(variant), lit(0)), std::move(loop)));
    out.push_back({CloseCursor{cursor}});
    return out;
}

/// Cursor + count sources for an iterator range (input table, collection path
/// or class extent).
struct RangeSource {
    SelectExpr cursor;
    Projection count_proj;
    FromClause count_from;
    std::string elem_type;
};

inline RangeSource range_source(const CompileCtx& ctx, const ExprPtr& range) {
    RangeSource rs;
    if (const auto* ex = std::get_if<ExtentE>(&range->v)) {
        rs.cursor = {{Projection::Kind::Col, "oid"},
                     {FromClause::Kind::Table, ex->cls, nullptr, {}},
                     truth()};
        rs.count_proj = {Projection::Kind::CountCol, "oid"};
        rs.count_from = {FromClause::Kind::Table, ex->cls, nullptr, {}};
        rs.elem_type = "INTEGER";
        return rs;
    }
    const TPath& tp = expect_tpath(range, "iterator range");
    if (tp.accesses.empty()) { // collection input
        if (tp.start.kind != RefStart::Kind::Io || !io_is_collection(ctx, tp.start.name))
            throw CompileError("iterator range is not a collection");
        rs.cursor = {{Projection::Kind::Star, {}},
                     {FromClause::Kind::Table, tp.start.name, nullptr, {}},
                     truth()};
        rs.count_proj = {Projection::Kind::CountStar, {}};
        rs.count_from = {FromClause::Kind::Table, tp.start.name, nullptr, {}};
        rs.elem_type = declare_sql_type(ctx.env->io.at(tp.start.name).base);
        return rs;
    }
    SelectExpr sel = collection_select(ctx, tp);
    rs.cursor = sel;
    rs.count_proj = {Projection::Kind::CountCol, "oid"};
    rs.count_from = {FromClause::Kind::Sub, {}, std::make_shared<const SelectExpr>(sel),
                     tp.accesses.back().prop.prop};
    const PropertyDecl& pd = prop_of(ctx, tp.accesses.back().prop);
    rs.elem_type = declare_sql_type(pd.target);
    return rs;
}

/// Insert of one association link row, columns in canonical table order.
/// `elem` goes to the target end's column, `owner` to the opposite column.
inline Insert assoc_insert(const CompileCtx& ctx, const AssocTable& at,
                           const IdenProperty& target_end, SqlExprPtr elem, SqlExprPtr owner,
                           SqlExprPtr index) {
    Insert ins;
    ins.table = at.name;
    bool skip_opp = ctx.options.mutation == Mutation::SkipOppositeWrite;
    auto add = [&](const IdenProperty& end) {
        SqlExprPtr v = end == target_end ? elem : owner;
        if (skip_opp && !(end == target_end)) return; // drop the opposite column
        ins.columns.push_back(end.prop);
        ins.values.push_back(v);
    };
    add(at.end1);
    add(at.end2);
    if (at.has_index && index) {
        ins.columns.push_back("index");
        ins.values.push_back(index);
    }
    return ins;
}

inline bool same_tpath(const ExprPtr& e, const TPath& tp) {
    const auto* pe = std::get_if<PathExpr>(&e->v);
    if (!pe) return false;
    const auto* q = std::get_if<TPath>(&pe->path.v);
    return q && equal(*q, tp);
}

Stmts to_sql_proc(CompileCtx& ctx, const SubPtr& s);

/// The pattern matrix. Dispatch is on the target's final table access, the
/// opposite end's multiplicity and the shape of the source expression.
inline Stmts trans_assign(CompileCtx& ctx, const Assign& a) {
    const auto* tpp = std::get_if<TPath>(&a.target.v);
    if (!tpp) throw CompileError("assignment target is not Table-staged");
    const TPath& tp = *tpp;

    if (tp.accesses.empty()) {
        // indexed component of an implicit-this sequence: qs(i) := v
        if (tp.start.kind == RefStart::Kind::SC) {
            const PropertyDecl& pd = prop_of(ctx, tp.start.prop);
            SqlExprPtr idx = to_sql_expr(ctx, tp.start.index);
            SqlExprPtr v = to_sql_expr(ctx, a.source);
            Update up;
            if (pd.opposite) {
                const AssocTable* at = ctx.tm->assoc_for(tp.start.prop);
                up.table = at->name;
                up.sets = {{tp.start.prop.prop, v}};
                up.where = bin(SqlBinOp::And,
                               bin(SqlBinOp::Eq, name(at->other_end(tp.start.prop).prop),
                                   name("this?")),
                               bin(SqlBinOp::Eq, name("index"), idx));
                ctx.hit("seq-indexed-overwrite-assoc");
            } else {
                const ElementTable* et = ctx.tm->element_for(tp.start.prop);
                up.table = et->name;
                up.sets = {{tp.start.prop.prop, v}};
                up.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("oid"), name("this?")),
                               bin(SqlBinOp::Eq, name("index"), idx));
                ctx.hit("seq-indexed-overwrite");
            }
            return {{up}};
        }
        // bare output: SET `x!` = e
        if (tp.start.kind != RefStart::Kind::Io || tp.start.name.back() != '!')
            throw CompileError("cannot assign to '" + path_key(tp) + "'");
        ctx.hit("output-assign");
        return {{SetVar{tp.start.name, to_sql_expr(ctx, a.source)}}};
    }

    const TAccess& last = tp.accesses.back();
    const PropertyDecl& pd = prop_of(ctx, last.prop);
    SqlExprPtr owner = scalar_path_expr(ctx, tpath_prefix(tp));

    switch (last.kind) {
        case TAccessKind::ClassT: {
            ctx.hit(std::holds_alternative<UndefinedE>(a.source->v) ? "class-scalar-clear"
                                                                    : "class-scalar-overwrite");
            Update up;
            up.table = last.prop.cls;
            up.sets = {{last.prop.prop, to_sql_expr(ctx, a.source)}};
            up.where = bin(SqlBinOp::Eq, name("oid"), owner);
            return {{up}};
        }

        case TAccessKind::SeqTC: {
            // overwrite of one indexed component
            SqlExprPtr idx = to_sql_expr(ctx, last.index);
            SqlExprPtr v = to_sql_expr(ctx, a.source);
            Update up;
            if (pd.opposite) {
                const AssocTable* at = ctx.tm->assoc_for(last.prop);
                up.table = at->name;
                up.sets = {{last.prop.prop, v}};
                up.where = bin(SqlBinOp::And,
                               bin(SqlBinOp::Eq, name(at->other_end(last.prop).prop), owner),
                               bin(SqlBinOp::Eq, name("index"), idx));
                ctx.hit("seq-indexed-overwrite-assoc");
            } else {
                const ElementTable* et = ctx.tm->element_for(last.prop);
                up.table = et->name;
                up.sets = {{last.prop.prop, v}};
                up.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("oid"), owner),
                               bin(SqlBinOp::Eq, name("index"), idx));
                ctx.hit("seq-indexed-overwrite");
            }
            return {{up}};
        }

        case TAccessKind::AssocT: {
            const AssocTable* at = ctx.tm->assoc_for(last.prop);
            const IdenProperty opp = at->other_end(last.prop);
            const PropKind opp_kind = at->kind_of(opp);
            const std::string opp_name = prop_kind_name(opp_kind);

            if (pd.kind == PropKind::Optional || pd.kind == PropKind::One) {
                // single-valued end overwrite: o.p := that
                if (std::holds_alternative<UndefinedE>(a.source->v))
                    unimplemented({prop_kind_name(pd.kind), opp_name, "remove-element"});
                SqlExprPtr that = to_sql_expr(ctx, a.source);
                if (opp_kind == PropKind::Seq) {
                    // append o at the end of that's sequence
                    ctx.hit("single-overwrite-opp-seq");
                    SelectExpr cnt;
                    cnt.proj = {Projection::Kind::CountCol, "oid"};
                    cnt.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                    cnt.where = bin(SqlBinOp::Eq, name(last.prop.prop), that);
                    SqlExprPtr idx = bin(SqlBinOp::Add, mk<SelectExpr>(cnt), lit(1));
                    return {{assoc_insert(ctx, *at, last.prop, that, owner, idx)}};
                }
                if (opp_kind == PropKind::Set) {
                    ctx.hit("single-overwrite-opp-set");
                    return {{assoc_insert(ctx, *at, last.prop, that, owner, nullptr)}};
                }
                // opposite single-valued: update the row if it exists, else insert
                ctx.hit("single-overwrite-opp-single");
                SelectExpr cnt;
                cnt.proj = {Projection::Kind::CountCol, "oid"};
                cnt.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                cnt.where = bin(SqlBinOp::Eq, name(opp.prop), owner);
                Update up;
                up.table = at->name;
                up.sets = {{last.prop.prop, that}};
                up.where = bin(SqlBinOp::Eq, name(opp.prop), owner);
                Stmts then_b{{up}};
                Stmts else_b{{assoc_insert(ctx, *at, last.prop, that, owner, nullptr)}};
                return {if_stmt(bin(SqlBinOp::Gt, mk<SelectExpr>(cnt), lit(0)),
                                std::move(then_b), std::move(else_b))};
            }

            if (pd.kind == PropKind::Seq) {
                // insertion: bs := ins(bs, i, that)  — Table 1 pattern 23
                if (const auto* ins = std::get_if<InsE>(&a.source->v)) {
                    if (!same_tpath(ins->seq, tp))
                        throw CompileError("sequence insertion must target its own path");
                    ctx.hit(opp_kind == PropKind::Optional ? "seq-insert-opp-opt"
                                                           : "seq-insert-opp-one");
                    SqlExprPtr i = to_sql_expr(ctx, ins->index);
                    SqlExprPtr that = to_sql_expr(ctx, ins->elem);
                    Update shift;
                    shift.table = at->name;
                    shift.sets = {{"index", bin(SqlBinOp::Add, name("index"), lit(1))}};
                    shift.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name(opp.prop), owner),
                                      bin(SqlBinOp::Ge, name("index"), i));
                    Insert insert = assoc_insert(ctx, *at, last.prop, that, owner, i);
                    Stmts out;
                    switch (ctx.options.mutation) {
                        case Mutation::DropIndexShift: out.push_back({insert}); break;
                        case Mutation::SwapInsertUpdate:
                            out.push_back({insert});
                            out.push_back({shift});
                            break;
                        default:
                            out.push_back({shift});
                            out.push_back({insert});
                    }
                    return out;
                }
                if (const auto* cat = std::get_if<ConcatE>(&a.source->v)) {
                    if (!same_tpath(cat->lhs, tp))
                        throw CompileError("sequence append must target its own path");
                    ctx.hit("seq-concat-assoc");
                    RangeSource rs = range_source(ctx, cat->rhs);
                    std::string var = ctx.fresh_var();
                    std::string key = path_key(tp);
                    CompileCtx inner = ctx;
                    inner.caches[key] = {CacheEntry::Kind::TempTable, last.prop.prop};
                    SqlExprPtr idx =
                        bin(SqlBinOp::Add, count_expr(inner, tp), lit(1));
                    Stmts body{{assoc_insert(ctx, *at, last.prop, name(var), owner, idx)}};
                    SelectInto count_into{rs.count_proj, var + "_variant", rs.count_from,
                                          truth()};
                    Stmts out{{DropTempTable{key}},
                              {CreateTempTableAs{key, collection_select(ctx, tp, false)}}};
                    for (auto& st :
                         make_loop(ctx, var, rs.elem_type, rs.cursor, count_into, body, {tp}))
                        out.push_back(std::move(st));
                    return out;
                }
                unimplemented({"seq", opp_name, "overwrite"});
            }

            // pd.kind == Set: insertion of elements
            if (const auto* un = std::get_if<UnionE>(&a.source->v)) {
                if (!same_tpath(un->lhs, tp))
                    throw CompileError("set insertion must target its own path");
                auto one_insert = [&](SqlExprPtr elem) -> SqlStatement {
                    SqlExprPtr index;
                    if (opp_kind == PropKind::Seq) {
                        // position of the owner within the element's sequence
                        SelectExpr cnt;
                        cnt.proj = {Projection::Kind::CountCol, "oid"};
                        cnt.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                        cnt.where = bin(SqlBinOp::Eq, name(last.prop.prop), elem);
                        index = bin(SqlBinOp::Add, mk<SelectExpr>(cnt), lit(1));
                    }
                    Insert ins = assoc_insert(ctx, *at, last.prop, elem, owner, index);
                    SelectExpr dup;
                    dup.proj = {Projection::Kind::CountCol, "oid"};
                    dup.from = {FromClause::Kind::Table, at->name, nullptr, {}};
                    dup.where =
                        bin(SqlBinOp::And, bin(SqlBinOp::Eq, name(last.prop.prop), elem),
                            bin(SqlBinOp::Eq, name(opp.prop), owner));
                    return if_stmt(bin(SqlBinOp::Eq, mk<SelectExpr>(dup), lit(0)), {{ins}});
                };
                if (const auto* disp = std::get_if<SetDisplay>(&un->rhs->v)) {
                    ctx.hit("set-assoc-insert");
                    Stmts out;
                    for (const auto& e : disp->elems)
                        out.push_back(one_insert(to_sql_expr(ctx, e)));
                    return out;
                }
                ctx.hit("set-assoc-union");
                RangeSource rs = range_source(ctx, un->rhs);
                std::string var = ctx.fresh_var();
                Stmts body{one_insert(name(var))};
                SelectInto count_into{rs.count_proj, var + "_variant", rs.count_from, truth()};
                return make_loop(ctx, var, rs.elem_type, rs.cursor, count_into, body, {tp});
            }
            unimplemented({"set", opp_name, "overwrite"});
        }

        case TAccessKind::SetT: {
            const ElementTable* et = ctx.tm->element_for(last.prop);
            const auto* un = std::get_if<UnionE>(&a.source->v);
            if (!un) unimplemented({"set", "none", "overwrite"});
            if (!same_tpath(un->lhs, tp))
                throw CompileError("set insertion must target its own path");
            auto one_insert = [&](SqlExprPtr elem) -> SqlStatement {
                return {Insert{et->name, {"oid", last.prop.prop}, {owner, elem}}};
            };
            if (const auto* disp = std::get_if<SetDisplay>(&un->rhs->v)) {
                ctx.hit("set-insert");
                Stmts out;
                for (const auto& e : disp->elems) out.push_back(one_insert(to_sql_expr(ctx, e)));
                return out;
            }
            ctx.hit("set-union-input");
            RangeSource rs = range_source(ctx, un->rhs);
            std::string var = ctx.fresh_var();
            Stmts body{one_insert(name(var))};
            SelectInto count_into{rs.count_proj, var + "_variant", rs.count_from, truth()};
            return make_loop(ctx, var, rs.elem_type, rs.cursor, count_into, body, {tp});
        }

        case TAccessKind::SeqT: {
            const ElementTable* et = ctx.tm->element_for(last.prop);
            if (const auto* ins = std::get_if<InsE>(&a.source->v)) {
                if (!same_tpath(ins->seq, tp))
                    throw CompileError("sequence insertion must target its own path");
                ctx.hit("seq-insert-prim");
                SqlExprPtr i = to_sql_expr(ctx, ins->index);
                SqlExprPtr v = to_sql_expr(ctx, ins->elem);
                Update shift;
                shift.table = et->name;
                shift.sets = {{"index", bin(SqlBinOp::Add, name("index"), lit(1))}};
                shift.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("oid"), owner),
                                  bin(SqlBinOp::Ge, name("index"), i));
                Insert insert{et->name, {"oid", last.prop.prop, "index"}, {owner, v, i}};
                Stmts out;
                switch (ctx.options.mutation) {
                    case Mutation::DropIndexShift: out.push_back({insert}); break;
                    case Mutation::SwapInsertUpdate:
                        out.push_back({insert});
                        out.push_back({shift});
                        break;
                    default:
                        out.push_back({shift});
                        out.push_back({insert});
                }
                return out;
            }
            if (const auto* cat = std::get_if<ConcatE>(&a.source->v)) {
                if (!same_tpath(cat->lhs, tp))
                    throw CompileError("sequence append must target its own path");
                ctx.hit("seq-concat-prim");
                RangeSource rs = range_source(ctx, cat->rhs);
                std::string var = ctx.fresh_var();
                std::string key = path_key(tp);
                CompileCtx inner = ctx;
                inner.caches[key] = {CacheEntry::Kind::TempTable, last.prop.prop};
                SqlExprPtr idx = bin(SqlBinOp::Add, count_expr(inner, tp), lit(1));
                Insert insert{et->name, {"oid", last.prop.prop, "index"},
                              {owner, name(var), idx}};
                Stmts body{{insert}};
                SelectInto count_into{rs.count_proj, var + "_variant", rs.count_from, truth()};
                Stmts out{{DropTempTable{key}},
                          {CreateTempTableAs{key, collection_select(ctx, tp, false)}}};
                for (auto& st :
                     make_loop(ctx, var, rs.elem_type, rs.cursor, count_into, body, {tp}))
                    out.push_back(std::move(st));
                return out;
            }
            unimplemented({"seq", "none", "overwrite"});
        }
    }
    throw CompileError("unreachable target access");
}

// ---------------------------------------------------------------------------
// Parallel composition: absorption of opposite-end writes, read caching

namespace par {

inline void flatten(const SubPtr& s, std::vector<SubPtr>& out) {
    if (const auto* p = std::get_if<Par>(&s->v)) {
        flatten(p->lhs, out);
        flatten(p->rhs, out);
        return;
    }
    out.push_back(s);
}

/// The element written by a collection-end update, if the branch has the
/// shape `bs := ins(bs, i, e)` or `as := as \/ {e}`.
inline ExprPtr collection_elem(const Assign& a) {
    if (const auto* ins = std::get_if<InsE>(&a.source->v)) return ins->elem;
    if (const auto* un = std::get_if<UnionE>(&a.source->v)) {
        if (const auto* d = std::get_if<SetDisplay>(&un->rhs->v))
            if (d->elems.size() == 1) return d->elems[0];
    }
    return nullptr;
}

inline const TPath* assign_target(const SubPtr& s) {
    const auto* a = std::get_if<Assign>(&s->v);
    if (!a) return nullptr;
    return std::get_if<TPath>(&a->target.v);
}

/// Marks branches that only restate the opposite end of a sibling update;
/// their association row is written once, by the sibling's pattern.
inline std::vector<bool> absorbed_branches(const CompileCtx& ctx,
                                           const std::vector<SubPtr>& branches) {
    std::vector<bool> absorbed(branches.size(), false);
    auto opposite_of = [&](const IdenProperty& ip) -> const IdenProperty* {
        const PropertyDecl& pd = prop_of(ctx, ip);
        return pd.opposite ? &*pd.opposite : nullptr;
    };
    auto owner_expr_of = [&](const TPath& tp) -> ExprPtr {
        return mk_path(Path{tpath_prefix(tp)});
    };

    for (size_t i = 0; i < branches.size(); ++i) {
        const TPath* ti = assign_target(branches[i]);
        if (!ti || ti->accesses.empty()) continue;
        const auto* ai = std::get_if<Assign>(&branches[i]->v);
        const TAccess& lasti = ti->accesses.back();
        if (lasti.kind != TAccessKind::AssocT) continue;
        const PropertyDecl& pdi = prop_of(ctx, lasti.prop);

        if (is_collection(pdi.kind)) {
            // collection-end update absorbs `elem.q := owner`
            ExprPtr elem = collection_elem(*ai);
            if (!elem) continue;
            const IdenProperty* opp = opposite_of(lasti.prop);
            if (!opp) continue;
            for (size_t j = 0; j < branches.size(); ++j) {
                if (j == i || absorbed[j]) continue;
                const TPath* tj = assign_target(branches[j]);
                if (!tj || tj->accesses.empty()) continue;
                const auto* aj = std::get_if<Assign>(&branches[j]->v);
                const TAccess& lastj = tj->accesses.back();
                if (lastj.kind != TAccessKind::AssocT || !(lastj.prop == *opp)) continue;
                // target prefix of j must be the inserted element; source of j
                // must be the owner of i
                if (!equal(mk_path(Path{tpath_prefix(*tj)}), elem)) continue;
                if (!equal(aj->source, owner_expr_of(*ti))) continue;
                absorbed[j] = true;
            }
        } else if (!absorbed[i]) {
            // single-single pair: keep the first, absorb the mirrored write
            const IdenProperty* opp = opposite_of(lasti.prop);
            if (!opp) continue;
            const PropertyDecl& pdo = prop_of(ctx, *opp);
            if (is_collection(pdo.kind)) continue;
            for (size_t j = i + 1; j < branches.size(); ++j) {
                if (absorbed[j]) continue;
                const TPath* tj = assign_target(branches[j]);
                if (!tj || tj->accesses.empty()) continue;
                const auto* aj = std::get_if<Assign>(&branches[j]->v);
                const TAccess& lastj = tj->accesses.back();
                if (lastj.kind != TAccessKind::AssocT || !(lastj.prop == *opp)) continue;
                if (!equal(mk_path(Path{tpath_prefix(*tj)}), ai->source)) continue;
                if (!equal(aj->source, owner_expr_of(*ti))) continue;
                absorbed[j] = true;
            }
        }
    }
    return absorbed;
}

/// Paths read by a branch, as (key, path) pairs. Self-reads of
/// `t := t \/ e` / `t := t ^ e` / `t := ins(t, i, e)` are not reads in the
/// compiled form and are excluded; paths headed by loop variables or carrying
/// index expressions are not cacheable.
struct ReadSet {
    std::map<std::string, TPath> reads;
};

inline bool cacheable(const TPath& tp) {
    if (tp.accesses.empty()) return false; // parameters and input tables
    if (tp.start.kind == RefStart::Kind::Var || tp.start.kind == RefStart::Kind::SC)
        return false;
    for (const auto& a : tp.accesses)
        if (a.kind == TAccessKind::SeqTC) return false;
    return true;
}

inline void collect_expr_reads(const ExprPtr& e, const TPath* self, ReadSet& out) {
    if (!e) return;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PathExpr>) {
                if (const auto* tp = std::get_if<TPath>(&n.path.v)) {
                    if (cacheable(*tp)) out.reads.emplace(path_key(*tp), *tp);
                    for (const auto& a : tp->accesses)
                        if (a.index) collect_expr_reads(a.index, self, out);
                    if (tp->start.index) collect_expr_reads(tp->start.index, self, out);
                }
            } else if constexpr (std::is_same_v<T, boosql::Unary>) collect_expr_reads(n.arg, self, out);
            else if constexpr (std::is_same_v<T, boosql::Binary>) {
                collect_expr_reads(n.lhs, self, out);
                collect_expr_reads(n.rhs, self, out);
            } else if constexpr (std::is_same_v<T, Card>) collect_expr_reads(n.arg, self, out);
            else if constexpr (std::is_same_v<T, UnionE> || std::is_same_v<T, ConcatE>) {
                // lhs may be the self-read of a union/concat update
                if (!(self && same_tpath(n.lhs, *self))) collect_expr_reads(n.lhs, self, out);
                collect_expr_reads(n.rhs, self, out);
            } else if constexpr (std::is_same_v<T, SeqDisplay> || std::is_same_v<T, SetDisplay>) {
                for (const auto& x : n.elems) collect_expr_reads(x, self, out);
            } else if constexpr (std::is_same_v<T, InsE>) {
                if (!(self && same_tpath(n.seq, *self))) collect_expr_reads(n.seq, self, out);
                collect_expr_reads(n.index, self, out);
                collect_expr_reads(n.elem, self, out);
            }
        },
        e->v);
}

inline void collect_branch_reads(const SubPtr& s, ReadSet& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) {}
            else if constexpr (std::is_same_v<T, Assign>) {
                const auto* tp = std::get_if<TPath>(&n.target.v);
                collect_expr_reads(n.source, tp, out);
                if (tp) {
                    if (tp->start.index) collect_expr_reads(tp->start.index, nullptr, out);
                    for (const auto& a : tp->accesses)
                        if (a.index) collect_expr_reads(a.index, nullptr, out);
                }
            } else if constexpr (std::is_same_v<T, Guard>) {
                collect_expr_reads(n.cond, nullptr, out);
                collect_branch_reads(n.body, out);
            } else if constexpr (std::is_same_v<T, Par> || std::is_same_v<T, SeqC> ||
                                 std::is_same_v<T, Choice>) {
                collect_branch_reads(n.lhs, out);
                collect_branch_reads(n.rhs, out);
            } else {
                collect_expr_reads(n.range, nullptr, out);
                collect_branch_reads(n.body, out);
            }
        },
        s->v);
}

} // namespace par

inline Stmts compile_par(CompileCtx& ctx, const SubPtr& s) {
    std::vector<SubPtr> branches;
    par::flatten(s, branches);
    std::vector<bool> absorbed = par::absorbed_branches(ctx, branches);

    par::ReadSet reads;
    for (size_t i = 0; i < branches.size(); ++i)
        if (!absorbed[i]) par::collect_branch_reads(branches[i], reads);

    Stmts out;
    CompileCtx inner = ctx;

    // created outputs: declare caching variables for every single-valued
    // attribute; class-table scalars are loaded, association-backed ones are
    // declared only (their fresh values are null anyway)
    std::vector<SqlStatement> loads;
    for (const auto& [out_name, cls] : ctx.created) {
        const ClassDecl* cd = ctx.model().find_class(cls);
        std::vector<const PropertyDecl*> scalars, singles;
        for (const auto& p : cd->properties) {
            if (is_collection(p.kind)) continue;
            if (classify_property(ctx.model(), {cls, p.name}) == StorageKind::ClassColumn)
                scalars.push_back(&p);
            else
                singles.push_back(&p);
        }
        for (const auto* p : scalars) {
            std::string key = out_name + "." + p->name;
            ctx.declarations->push_back({DeclareVar{key, scalar_sql_type(p->target)}});
            inner.caches[key] = {CacheEntry::Kind::Var, {}};
            loads.push_back({SelectInto{{Projection::Kind::Col, p->name},
                                        key,
                                        {FromClause::Kind::Table, cls, nullptr, {}},
                                        bin(SqlBinOp::Eq, name("oid"), name(out_name))}});
        }
        for (const auto* p : singles)
            ctx.declarations->push_back({DeclareVar{out_name + "." + p->name, "INTEGER"}});
    }

    // multi-valued reads become temp tables, single-valued ones variables
    std::vector<SqlStatement> var_loads;
    for (const auto& [key, tp] : reads.reads) {
        if (inner.caches.count(key)) continue;
        if (is_collection_path(ctx, tp)) {
            out.push_back({DropTempTable{key}});
            out.push_back({CreateTempTableAs{key, collection_select(ctx, tp, false)}});
            inner.caches[key] = {CacheEntry::Kind::TempTable, tp.accesses.back().prop.prop};
        } else {
            const TAccess& last = tp.accesses.back();
            const PropertyDecl& pd = prop_of(ctx, last.prop);
            ctx.declarations->push_back({DeclareVar{key, scalar_sql_type(pd.target)}});
            SqlExprPtr sel = scalar_path_expr(ctx, tp);
            const auto* se = std::get_if<SelectExpr>(&sel->v);
            if (!se) throw CompileError("cannot cache '" + key + "'");
            var_loads.push_back({SelectInto{se->proj, key, se->from, se->where}});
            inner.caches[key] = {CacheEntry::Kind::Var, {}};
        }
    }
    for (auto& st : loads) out.push_back(std::move(st));
    for (auto& st : var_loads) out.push_back(std::move(st));

    for (size_t i = 0; i < branches.size(); ++i) {
        if (absorbed[i]) continue;
        Stmts bs = to_sql_proc(inner, branches[i]);
        for (auto& st : bs) out.push_back(std::move(st));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recursive cases

inline Stmts compile_guard(CompileCtx& ctx, const Guard& g) {
    GuardInfo info = analyze_guard(g.cond);
    SqlExprPtr cond;
    auto add = [&](const ExprPtr& c) {
        SqlExprPtr e = to_sql_expr(ctx, c);
        if (const auto* b = std::get_if<BoolL>(&e->v); b && b->value) return;
        cond = cond ? bin(SqlBinOp::And, cond, e) : e;
    };
    for (const auto& c : info.checks) add(c);
    for (const auto& c : info.residual) add(c);
    if (!cond) cond = truth();

    CompileCtx inner = ctx;
    Stmts then_b;
    for (const auto& [out_name, cls] : info.creations) {
        then_b.push_back({Insert{cls, {}, {}}});
        then_b.push_back({SetVar{out_name, mk<LastInsertId>()}});
        inner.created.emplace_back(out_name, cls);
    }
    Stmts body = to_sql_proc(inner, g.body);
    for (auto& st : body) then_b.push_back(std::move(st));

    Stmts else_b;
    if (ctx.options.guard_mode == GuardMode::Signal)
        else_b.push_back({Signal{"guard violated"}});
    return {if_stmt(cond, std::move(then_b), std::move(else_b))};
}

inline Stmts to_sql_proc(CompileCtx& ctx, const SubPtr& s) {
    return std::visit(
        [&](const auto& n) -> Stmts {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) return {};
            else if constexpr (std::is_same_v<T, Assign>) return trans_assign(ctx, n);
            else if constexpr (std::is_same_v<T, Guard>) return compile_guard(ctx, n);
            else if constexpr (std::is_same_v<T, Par>) return compile_par(ctx, s);
            else if constexpr (std::is_same_v<T, SeqC>) {
                ctx.hit("seq-composition");
                Stmts out = to_sql_proc(ctx, n.lhs);
                Stmts rhs = to_sql_proc(ctx, n.rhs);
                for (auto& st : rhs) out.push_back(std::move(st));
                return out;
            } else if constexpr (std::is_same_v<T, Choice>) {
                // only guard-rooted alternatives are deterministic enough
                std::vector<const Guard*> arms;
                std::function<void(const SubPtr&)> collect = [&](const SubPtr& c) {
                    if (const auto* ch = std::get_if<Choice>(&c->v)) {
                        collect(ch->lhs);
                        collect(ch->rhs);
                        return;
                    }
                    const auto* g = std::get_if<Guard>(&c->v);
                    if (!g)
                        throw CompileError(
                            "nondeterministic choice: every alternative must be guarded");
                    arms.push_back(g);
                };
                collect(s);
                Stmts out;
                for (auto it = arms.rbegin(); it != arms.rend(); ++it) {
                    Stmts arm = compile_guard(ctx, **it);
                    auto& ite = std::get<std::shared_ptr<const sql::IfThenElse>>(arm[0].v);
                    out = {sql::if_stmt(ite->cond, ite->then_branch, std::move(out))};
                }
                ctx.hit("choice");
                return out;
            } else if constexpr (std::is_same_v<T, All>) {
                ctx.hit("all-iterator");
                RangeSource rs = range_source(ctx, n.range);
                CompileCtx inner = ctx;
                Stmts body = to_sql_proc(inner, n.body);
                SelectInto count_into{rs.count_proj, n.var + "_variant", rs.count_from,
                                      truth()};
                return make_loop(ctx, n.var, rs.elem_type, rs.cursor, count_into, body, {});
            } else {
                // Any: deterministic pick of the first candidate in cursor
                // order, guarded against an empty range
                ctx.hit("any-iterator");
                RangeSource rs = range_source(ctx, n.range);
                std::string cursor = n.var + "_cursor";
                ctx.declarations->push_back({DeclareVar{n.var, rs.elem_type}});
                ctx.declarations->push_back({DeclareCursor{cursor, rs.cursor}});
                SelectExpr cnt;
                cnt.proj = rs.count_proj;
                cnt.from = rs.count_from;
                cnt.where = truth();
                CompileCtx inner = ctx;
                Stmts then_b;
                then_b.push_back({OpenCursor{cursor}});
                then_b.push_back({FetchInto{cursor, n.var}});
                then_b.push_back({CloseCursor{cursor}});
                Stmts body = to_sql_proc(inner, n.body);
                for (auto& st : body) then_b.push_back(std::move(st));
                return {if_stmt(bin(SqlBinOp::Gt, mk<SelectExpr>(cnt), lit(0)),
                                std::move(then_b))};
            }
        },
        s->v);
}

} // namespace backend

using backend::to_sql_proc;
using backend::trans_assign;

// ---------------------------------------------------------------------------
// Procedure generation

struct GenResult {
    sql::SqlProcedure proc;
    std::set<std::string> cells; // pattern-matrix coverage
};

namespace backend {

/// Decorated input/output names in order of first use (guard first, then body).
inline void collect_io_order(const SubPtr& s, std::vector<std::string>& order) {
    auto see = [&](const std::string& name) {
        for (const auto& n : order)
            if (n == name) return;
        order.push_back(name);
    };
    auto scan_expr = [&](const ExprPtr& e) {
        for_each_subexpr(e, [&](const Expression& x) {
            if (const auto* pe = std::get_if<PathExpr>(&x.v)) {
                if (const auto* op = std::get_if<OPath>(&pe->path.v)) {
                    if (op->start.kind == RefStart::Kind::Io) see(op->start.name);
                } else if (const auto* tp = std::get_if<TPath>(&pe->path.v)) {
                    if (tp->start.kind == RefStart::Kind::Io) see(tp->start.name);
                }
            }
        });
    };
    std::function<void(const SubPtr&)> walk = [&](const SubPtr& sub) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    const auto* tp = std::get_if<TPath>(&n.target.v);
                    const auto* op = std::get_if<OPath>(&n.target.v);
                    if (tp && tp->start.kind == RefStart::Kind::Io) see(tp->start.name);
                    if (op && op->start.kind == RefStart::Kind::Io) see(op->start.name);
                    scan_expr(n.source);
                } else if constexpr (std::is_same_v<T, Guard>) {
                    scan_expr(n.cond);
                    walk(n.body);
                } else if constexpr (std::is_same_v<T, Par> || std::is_same_v<T, SeqC> ||
                                     std::is_same_v<T, Choice>) {
                    walk(n.lhs);
                    walk(n.rhs);
                } else if constexpr (std::is_same_v<T, All> || std::is_same_v<T, Any>) {
                    scan_expr(n.range);
                    walk(n.body);
                }
            },
            sub->v);
    };
    walk(s);
}

} // namespace backend

/// Full pipeline for one operation: resolve, translate to the table stage,
/// compile. IN params are `this?` followed by the inputs in first-use order;
/// OUT params are the outputs.
inline GenResult gen_procedure(const BoosterModel& m, const TableModel& tm,
                               const std::string& cls, const std::string& op,
                               CompileOptions options = {}) {
    ResolvedOp r = resolve_operation(m, cls, op);
    SubPtr t_body = obj_to_tab_substitution(m, r.body);

    GenResult res;
    res.proc.name = cls + "_" + op;

    std::vector<std::string> order;
    backend::collect_io_order(t_body, order);
    res.proc.in_params.emplace_back("this?", "INTEGER");
    for (const auto& n : order) {
        auto it = r.env.io.find(n);
        if (it == r.env.io.end()) continue;
        std::string type = scalar_sql_type(it->second.base);
        if (n.back() == '?') res.proc.in_params.emplace_back(n, type);
        else res.proc.out_params.emplace_back(n, type);
    }

    CompileCtx ctx;
    ctx.tm = &tm;
    ctx.ctx_class = cls;
    ctx.env = &r.env;
    ctx.options = options;
    sql::Stmts decls;
    int fresh = 0;
    std::set<std::string> cells;
    ctx.declarations = &decls;
    ctx.fresh_counter = &fresh;
    ctx.cells = &cells;

    sql::Stmts body = backend::to_sql_proc(ctx, t_body);
    res.proc.body = std::move(decls);
    for (auto& st : body) res.proc.body.push_back(std::move(st));
    res.cells = std::move(cells);
    return res;
}

inline GenResult gen_procedure(const BoosterModel& m, const std::string& cls,
                               const std::string& op, CompileOptions options = {}) {
    TableModel tm = derive_table_model(m);
    return gen_procedure(m, tm, cls, op, options);
}

// ---------------------------------------------------------------------------
// Static checks over emitted procedures

/// Def-before-use over cache variables and temp tables: every declared
/// variable is written (SELECT INTO / SET / FETCH) before it is read, and
/// every temp table is created before it is selected from, on every control
/// path. Branch joins are intersections; loop bodies are checked once against
/// the defs available at entry.
inline std::vector<std::string> check_def_before_use(const sql::SqlProcedure& proc) {
    using namespace sql;
    std::vector<std::string> issues;
    std::set<std::string> declared_vars, known_temps;

    std::function<void(const Stmts&)> scan_names = [&](const Stmts& list) {
        for (const auto& st : list)
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, DeclareVar>) declared_vars.insert(n.name);
                    else if constexpr (std::is_same_v<T, CreateTempTableAs>)
                        known_temps.insert(n.name);
                    else if constexpr (std::is_same_v<T, std::shared_ptr<const IfThenElse>>) {
                        scan_names(n->then_branch);
                        scan_names(n->else_branch);
                    } else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>)
                        scan_names(n->body);
                },
                st.v);
    };
    scan_names(proc.body);
    for (const auto& [n, t] : proc.in_params) declared_vars.erase(n);

    auto check_expr = [&](const SqlExprPtr& e, const std::set<std::string>& defs,
                          auto&& self) -> void {
        if (!e) return;
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Name>) {
                    if (declared_vars.count(n.name) && !defs.count(n.name))
                        issues.push_back("variable `" + n.name + "` read before definition");
                } else if constexpr (std::is_same_v<T, sql::Unary>) self(n.arg, defs, self);
                else if constexpr (std::is_same_v<T, sql::Binary>) {
                    self(n.lhs, defs, self);
                    self(n.rhs, defs, self);
                } else if constexpr (std::is_same_v<T, SelectExpr>) {
                    if (n.from.kind == FromClause::Kind::Table) {
                        if (known_temps.count(n.from.table) && !defs.count("#" + n.from.table))
                            issues.push_back("temp table `" + n.from.table +
                                             "` read before creation");
                    } else {
                        self(mk<SelectExpr>(*n.from.sub), defs, self);
                    }
                    self(n.where, defs, self);
                }
            },
            e->v);
    };

    std::function<std::set<std::string>(const Stmts&, std::set<std::string>)> run =
        [&](const Stmts& list, std::set<std::string> defs) {
            auto expr = [&](const SqlExprPtr& e) { check_expr(e, defs, check_expr); };
            auto sel = [&](const SelectExpr& s) { expr(mk<SelectExpr>(s)); };
            for (const auto& st : list) {
                std::visit(
                    [&](const auto& n) {
                        using T = std::decay_t<decltype(n)>;
                        if constexpr (std::is_same_v<T, Update>) {
                            for (const auto& [c, v] : n.sets) expr(v);
                            expr(n.where);
                        } else if constexpr (std::is_same_v<T, Insert>) {
                            for (const auto& v : n.values) expr(v);
                        } else if constexpr (std::is_same_v<T, SelectInto>) {
                            if (n.from.kind == FromClause::Kind::Sub) sel(*n.from.sub);
                            else if (known_temps.count(n.from.table) &&
                                     !defs.count("#" + n.from.table))
                                issues.push_back("temp table `" + n.from.table +
                                                 "` read before creation");
                            expr(n.where);
                            defs.insert(n.var);
                        } else if constexpr (std::is_same_v<T, CreateTempTableAs>) {
                            sel(n.select);
                            defs.insert("#" + n.name);
                        } else if constexpr (std::is_same_v<T, DropTempTable>) {
                            // drop alone leaves the cache undefined
                            defs.erase("#" + n.name);
                        } else if constexpr (std::is_same_v<T, DeclareCursor>) {
                            // cursor select is evaluated at OPEN; treat as read here
                            sel(n.select);
                        } else if constexpr (std::is_same_v<T, SetVar>) {
                            expr(n.value);
                            defs.insert(n.name);
                        } else if constexpr (std::is_same_v<T, FetchInto>) {
                            defs.insert(n.var);
                        } else if constexpr (std::is_same_v<T,
                                                            std::shared_ptr<const IfThenElse>>) {
                            expr(n->cond);
                            auto d1 = run(n->then_branch, defs);
                            auto d2 = run(n->else_branch, defs);
                            std::set<std::string> join;
                            for (const auto& x : d1)
                                if (d2.count(x)) join.insert(x);
                            defs = std::move(join);
                        } else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>) {
                            expr(n->cond);
                            run(n->body, defs); // body checked against entry defs
                        }
                    },
                    st.v);
            }
            return defs;
        };
    run(proc.body, {});
    return issues;
}

/// Syntactic loop-variant check: every WHILE condition is `variant > 0` and
/// the body decrements that variant exactly once.
inline bool check_loop_variants(const sql::SqlProcedure& proc) {
    using namespace sql;
    bool ok = true;
    std::function<void(const Stmts&)> walk = [&](const Stmts& list) {
        for (const auto& st : list)
            std::visit(
                [&](const auto& n) {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, std::shared_ptr<const IfThenElse>>) {
                        walk(n->then_branch);
                        walk(n->else_branch);
                    } else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>) {
                        const auto* cond = std::get_if<sql::Binary>(&n->cond->v);
                        if (!cond || cond->op != SqlBinOp::Gt ||
                            !std::holds_alternative<Name>(cond->lhs->v) ||
                            !std::holds_alternative<IntL>(cond->rhs->v) ||
                            std::get<IntL>(cond->rhs->v).value != 0) {
                            ok = false;
                            return;
                        }
                        std::string variant = std::get<Name>(cond->lhs->v).name;
                        int decrements = 0;
                        for (const auto& b : n->body) {
                            const auto* sv = std::get_if<SetVar>(&b.v);
                            if (sv && sv->name == variant) {
                                const auto* d = std::get_if<sql::Binary>(&sv->value->v);
                                bool is_dec = d && d->op == SqlBinOp::Sub &&
                                              std::holds_alternative<Name>(d->lhs->v) &&
                                              std::get<Name>(d->lhs->v).name == variant &&
                                              std::holds_alternative<IntL>(d->rhs->v) &&
                                              std::get<IntL>(d->rhs->v).value == 1;
                                if (is_dec) decrements++;
                                else ok = false;
                            }
                        }
                        if (decrements != 1) ok = false;
                        walk(n->body);
                    }
                },
                st.v);
    };
    walk(proc.body);
    return ok;
}

} // namespace boosql
