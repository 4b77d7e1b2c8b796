#pragma once

// Booster→Object path elaboration (name/type checking) and Object→Table path
// translation. Elaboration walks each dotted path from its head reference,
// recording for every step the class that declares the accessed property;
// translation classifies every step by the table that stores it.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "boosql/gsl.hpp"
#include "boosql/print.hpp"

namespace boosql {

/// A value type: base plus multiplicity. `known == false` stands for the type
/// of `undefined` and of empty displays, compatible with anything.
struct TypeRef {
    Base base;
    PropKind kind = PropKind::One;
    bool known = true;

    static TypeRef unknown() { return {Base::integer(), PropKind::One, false}; }
    bool is_collection_type() const { return known && is_collection(kind); }
};

inline bool base_compatible(const TypeRef& a, const TypeRef& b) {
    if (!a.known || !b.known) return true;
    return a.base == b.base;
}

struct TypingEnv {
    const BoosterModel* model = nullptr;
    std::string ctx_class;
    std::map<std::string, TypeRef> locals; // bound iterator variables
    std::map<std::string, TypeRef> io;     // decorated inputs/outputs

    const ClassDecl& ctx() const { return *model->find_class(ctx_class); }
};

// ---------------------------------------------------------------------------
// Guard conjunct analysis. Top-level conjuncts of the form `v! : extent(C)`
// bind fresh outputs; `v? : extent(C)` / `v? : set(S)` type inputs and double
// as runtime checks; everything else is the runtime guard proper.

struct GuardInfo {
    std::vector<std::pair<std::string, std::string>> creations; // (decorated name, class)
    std::vector<ExprPtr> checks;    // input membership checks
    std::vector<ExprPtr> residual;  // the guard proper
};

namespace detail {

inline void flatten_conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (const auto* b = std::get_if<Binary>(&e->v); b && b->op == BinOp::And) {
        flatten_conjuncts(b->lhs, out);
        flatten_conjuncts(b->rhs, out);
        return;
    }
    out.push_back(e);
}

/// Head of a bare one-segment path of any stage, as (name, decor).
inline std::optional<std::pair<std::string, Decor>> bare_head(const ExprPtr& e) {
    const auto* pe = std::get_if<PathExpr>(&e->v);
    if (!pe) return std::nullopt;
    if (const auto* bp = std::get_if<BPath>(&pe->path.v)) {
        if (bp->segments.size() != 1 || bp->segments[0].index) return std::nullopt;
        return std::make_pair(bp->segments[0].name, bp->segments[0].decor);
    }
    auto from_start = [](const RefStart& r) -> std::optional<std::pair<std::string, Decor>> {
        if (r.kind != RefStart::Kind::Io || r.name.empty()) return std::nullopt;
        char last = r.name.back();
        Decor d = last == '?' ? Decor::In : Decor::Out;
        return std::make_pair(r.name.substr(0, r.name.size() - 1), d);
    };
    if (const auto* op = std::get_if<OPath>(&pe->path.v))
        return op->targets.empty() ? from_start(op->start) : std::nullopt;
    const auto* tp = std::get_if<TPath>(&pe->path.v);
    return tp->accesses.empty() ? from_start(tp->start) : std::nullopt;
}

} // namespace detail

inline GuardInfo analyze_guard(const ExprPtr& cond) {
    GuardInfo info;
    std::vector<ExprPtr> cs;
    detail::flatten_conjuncts(cond, cs);
    for (const auto& c : cs) {
        const auto* b = std::get_if<Binary>(&c->v);
        if (b && b->op == BinOp::In) {
            auto head = detail::bare_head(b->lhs);
            if (head && head->second == Decor::Out) {
                if (const auto* ex = std::get_if<ExtentE>(&b->rhs->v)) {
                    info.creations.emplace_back(decorate(head->first, Decor::Out), ex->cls);
                    continue;
                }
                throw ResolveError("output '" + head->first +
                                   "!' must be typed by an extent(...) conjunct");
            }
            if (head && head->second == Decor::In) {
                info.checks.push_back(c);
                continue;
            }
        }
        info.residual.push_back(c);
    }
    return info;
}

// ---------------------------------------------------------------------------
// Path elaboration

namespace detail {
inline TypeRef prop_type(const PropertyDecl& p) { return {p.target, p.kind, true}; }
} // namespace detail

ExprPtr resolve_expr(const TypingEnv& env, const ExprPtr& e, TypeRef* type_out = nullptr);

/// Elaborate a Booster path into an object path. Every prefix identifies a
/// target class; the next attribute must be declared in it.
inline OPath resolve_bpath(const TypingEnv& env, const BPath& p, TypeRef* type_out = nullptr) {
    if (p.segments.empty()) throw ResolveError("empty path");
    OPath out;
    TypeRef cur;
    size_t next = 1;

    const BPathSeg& head = p.segments[0];
    if (head.decor == Decor::None && head.name == "this") {
        if (head.index) throw ResolveError("'this' cannot be indexed");
        out.start = {RefStart::Kind::This, Base::cls(env.ctx_class), {}, nullptr, {}};
        cur = {Base::cls(env.ctx_class), PropKind::One, true};
    } else if (head.decor != Decor::None) {
        std::string name = decorate(head.name, head.decor);
        auto it = env.io.find(name);
        if (it == env.io.end()) throw ResolveError("unknown input/output '" + name + "'");
        if (head.index) throw ResolveError("cannot index '" + name + "' directly");
        out.start = {RefStart::Kind::Io, it->second.base, {}, nullptr, name};
        cur = it->second;
    } else if (auto it = env.locals.find(head.name); it != env.locals.end()) {
        if (head.index) throw ResolveError("cannot index bound variable '" + head.name + "'");
        out.start = {RefStart::Kind::Var, it->second.base, {}, nullptr, head.name};
        cur = it->second;
    } else if (const PropertyDecl* pd = env.ctx().find_property(head.name)) {
        // implicit `this.`
        if (head.index) {
            if (pd->kind != PropKind::Seq)
                throw ResolveError("indexing a non-seq property: " + env.ctx_class + "." +
                                       head.name,
                                   env.ctx_class, head.name);
            TypeRef it_ty;
            ExprPtr idx = resolve_expr(env, head.index, &it_ty);
            out.start = {RefStart::Kind::SC, pd->target,
                         IdenProperty{env.ctx_class, head.name}, idx, {}};
            cur = {pd->target, PropKind::One, true};
        } else {
            out.start = {RefStart::Kind::This, Base::cls(env.ctx_class), {}, nullptr, {}};
            out.targets.push_back({IdenProperty{env.ctx_class, head.name}, false, nullptr});
            cur = detail::prop_type(*pd);
        }
    } else {
        throw ResolveError("unknown attribute '" + head.name + "' in class " + env.ctx_class,
                           env.ctx_class, head.name);
    }

    for (; next < p.segments.size(); ++next) {
        const BPathSeg& seg = p.segments[next];
        if (seg.decor != Decor::None)
            throw ResolveError("input/output decorations are only allowed on the path head");
        if (!cur.known || !cur.base.is_class())
            throw ResolveError("navigation through a non-class-valued property at '" +
                               seg.name + "'");
        if (cur.is_collection_type())
            throw ResolveError("navigation through collection-valued property requires an index");
        const std::string cls = cur.base.name;
        const PropertyDecl* pd = env.model->find_property(cls, seg.name);
        if (!pd)
            throw ResolveError("unknown attribute '" + seg.name + "' in class " + cls, cls,
                               seg.name);
        if (seg.index) {
            if (pd->kind != PropKind::Seq)
                throw ResolveError("indexing a non-seq property: " + cls + "." + seg.name, cls,
                                   seg.name);
            ExprPtr idx = resolve_expr(env, seg.index);
            out.targets.push_back({IdenProperty{cls, seg.name}, true, idx});
            cur = {pd->target, PropKind::One, true};
        } else {
            out.targets.push_back({IdenProperty{cls, seg.name}, false, nullptr});
            cur = detail::prop_type(*pd);
        }
    }
    if (type_out) *type_out = cur;
    return out;
}

/// Type of an already-elaborated object path (recomputed from the model).
inline TypeRef opath_type(const TypingEnv& env, const OPath& p) {
    TypeRef cur{p.start.base, PropKind::One, true};
    if (p.start.kind == RefStart::Kind::Io) {
        auto it = env.io.find(p.start.name);
        if (it != env.io.end()) cur = it->second;
    } else if (p.start.kind == RefStart::Kind::Var) {
        auto it = env.locals.find(p.start.name);
        if (it != env.locals.end()) cur = it->second;
    }
    for (const auto& t : p.targets) {
        const PropertyDecl* pd = env.model->find_property(t.prop.cls, t.prop.prop);
        if (!pd) throw ResolveError("unknown attribute " + t.prop.cls + "." + t.prop.prop);
        cur = t.indexed ? TypeRef{pd->target, PropKind::One, true} : detail::prop_type(*pd);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Expression elaboration with light type checking

inline ExprPtr resolve_expr(const TypingEnv& env, const ExprPtr& e, TypeRef* type_out) {
    auto ret = [&](ExprPtr r, TypeRef t) {
        if (type_out) *type_out = t;
        return r;
    };
    auto bool_t = TypeRef{Base::boolean(), PropKind::One, true};
    auto int_t = TypeRef{Base::integer(), PropKind::One, true};
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLit>) return ret(e, int_t);
            else if constexpr (std::is_same_v<T, StrLit>)
                return ret(e, {Base::str(), PropKind::One, true});
            else if constexpr (std::is_same_v<T, BoolLit>) return ret(e, bool_t);
            else if constexpr (std::is_same_v<T, EnumLit>)
                return ret(e, {Base::value_set(n.set), PropKind::One, true});
            else if constexpr (std::is_same_v<T, PathExpr>) {
                const auto* bp = std::get_if<BPath>(&n.path.v);
                if (!bp) { // already elaborated
                    if (type_out && std::holds_alternative<OPath>(n.path.v))
                        *type_out = opath_type(env, std::get<OPath>(n.path.v));
                    return e;
                }
                // value-set member literal, written Set.member
                if (bp->segments.size() == 2 && bp->segments[0].decor == Decor::None &&
                    !bp->segments[0].index && !bp->segments[1].index &&
                    bp->segments[1].decor == Decor::None) {
                    if (const ValueSetDecl* vs = env.model->find_value_set(bp->segments[0].name)) {
                        const std::string& m = bp->segments[1].name;
                        bool found = false;
                        for (const auto& x : vs->members) found |= (x == m);
                        if (!found)
                            throw ResolveError("'" + m + "' is not a member of value set " +
                                               vs->name);
                        return ret(mk_expr<EnumLit>(vs->name, m),
                                   {Base::value_set(vs->name), PropKind::One, true});
                    }
                }
                TypeRef t;
                OPath op = resolve_bpath(env, *bp, &t);
                return ret(mk_path(Path{std::move(op)}), t);
            } else if constexpr (std::is_same_v<T, Unary>) {
                TypeRef t;
                ExprPtr a = resolve_expr(env, n.arg, &t);
                if (n.op == UnOp::Neg && t.known && t.base.kind != Base::Kind::Int)
                    throw ResolveError("unary '-' needs an integer operand");
                if (n.op == UnOp::Not && t.known && t.base.kind != Base::Kind::Bool)
                    throw ResolveError("'not' needs a boolean operand");
                return ret(mk_expr<Unary>(n.op, a), n.op == UnOp::Neg ? int_t : bool_t);
            } else if constexpr (std::is_same_v<T, Binary>) {
                TypeRef lt, rt;
                ExprPtr l = resolve_expr(env, n.lhs, &lt);
                ExprPtr r = resolve_expr(env, n.rhs, &rt);
                switch (n.op) {
                    case BinOp::Add: case BinOp::Sub: case BinOp::Mul:
                        if ((lt.known && lt.base.kind != Base::Kind::Int) ||
                            (rt.known && rt.base.kind != Base::Kind::Int))
                            throw ResolveError("arithmetic needs integer operands");
                        return ret(mk_bin(n.op, l, r), int_t);
                    case BinOp::Eq: case BinOp::Ne:
                        if (!base_compatible(lt, rt))
                            throw ResolveError("comparing incompatible types");
                        return ret(mk_bin(n.op, l, r), bool_t);
                    case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
                        if ((lt.known && lt.base.kind != Base::Kind::Int) ||
                            (rt.known && rt.base.kind != Base::Kind::Int))
                            throw ResolveError("ordering needs integer operands");
                        return ret(mk_bin(n.op, l, r), bool_t);
                    case BinOp::In:
                        if (rt.known && !rt.is_collection_type())
                            throw ResolveError("':' needs a collection on the right");
                        return ret(mk_bin(n.op, l, r), bool_t);
                    case BinOp::And: case BinOp::Or: case BinOp::Implies:
                        if ((lt.known && lt.base.kind != Base::Kind::Bool) ||
                            (rt.known && rt.base.kind != Base::Kind::Bool))
                            throw ResolveError("boolean operator needs boolean operands");
                        return ret(mk_bin(n.op, l, r), bool_t);
                }
                throw ResolveError("unreachable operator");
            } else if constexpr (std::is_same_v<T, Card>) {
                TypeRef t;
                ExprPtr a = resolve_expr(env, n.arg, &t);
                if (t.known && !t.is_collection_type())
                    throw ResolveError("card(...) needs a set or sequence");
                return ret(mk_expr<Card>(a), int_t);
            } else if constexpr (std::is_same_v<T, UnionE>) {
                TypeRef lt, rt;
                ExprPtr l = resolve_expr(env, n.lhs, &lt);
                ExprPtr r = resolve_expr(env, n.rhs, &rt);
                if (!base_compatible(lt, rt)) throw ResolveError("union of incompatible sets");
                TypeRef t = lt.known ? lt : rt;
                t.kind = PropKind::Set;
                return ret(mk_expr<UnionE>(l, r), t);
            } else if constexpr (std::is_same_v<T, ConcatE>) {
                // rhs may be a set; its elements are appended in canonical order
                TypeRef lt, rt;
                ExprPtr l = resolve_expr(env, n.lhs, &lt);
                ExprPtr r = resolve_expr(env, n.rhs, &rt);
                if (!base_compatible(lt, rt))
                    throw ResolveError("concatenation of incompatible sequences");
                TypeRef t = lt.known ? lt : rt;
                t.kind = PropKind::Seq;
                return ret(mk_expr<ConcatE>(l, r), t);
            } else if constexpr (std::is_same_v<T, SeqDisplay> || std::is_same_v<T, SetDisplay>) {
                std::vector<ExprPtr> xs;
                TypeRef elem = TypeRef::unknown();
                for (const auto& x : n.elems) {
                    TypeRef t;
                    xs.push_back(resolve_expr(env, x, &t));
                    if (!base_compatible(elem, t))
                        throw ResolveError("display elements have incompatible types");
                    if (t.known) elem = t;
                }
                elem.kind = std::is_same_v<T, SeqDisplay> ? PropKind::Seq : PropKind::Set;
                if constexpr (std::is_same_v<T, SeqDisplay>)
                    return ret(mk_expr<SeqDisplay>(std::move(xs)), elem);
                else
                    return ret(mk_expr<SetDisplay>(std::move(xs)), elem);
            } else if constexpr (std::is_same_v<T, InsE>) {
                TypeRef st, it, et;
                ExprPtr s = resolve_expr(env, n.seq, &st);
                ExprPtr i = resolve_expr(env, n.index, &it);
                ExprPtr el = resolve_expr(env, n.elem, &et);
                if (st.known && st.kind != PropKind::Seq)
                    throw ResolveError("ins(...) needs a sequence");
                if (it.known && it.base.kind != Base::Kind::Int)
                    throw ResolveError("ins(...) position must be an integer");
                if (!base_compatible(st, et))
                    throw ResolveError("ins(...) element type mismatch");
                return ret(mk_expr<InsE>(s, i, el), st);
            } else if constexpr (std::is_same_v<T, ExtentE>) {
                if (!env.model->find_class(n.cls))
                    throw ResolveError("extent of unknown class '" + n.cls + "'");
                return ret(e, {Base::cls(n.cls), PropKind::Set, true});
            } else if constexpr (std::is_same_v<T, SetOfE>) {
                if (!env.model->find_value_set(n.set))
                    throw ResolveError("unknown value set '" + n.set + "'");
                return ret(e, {Base::value_set(n.set), PropKind::Set, true});
            } else { // UndefinedE
                return ret(e, TypeRef::unknown());
            }
        },
        e->v);
}

// ---------------------------------------------------------------------------
// Whole-program elaboration

namespace detail {
inline bool name_in_scope(const TypingEnv& env, const std::string& v) {
    if (env.locals.count(v)) return true;
    if (env.ctx().find_property(v)) return true;
    if (env.model->find_class(v) || env.model->find_value_set(v)) return true;
    return v == "this";
}
} // namespace detail

inline SubPtr resolve_substitution(const TypingEnv& env, const SubPtr& s) {
    return std::visit(
        [&](const auto& n) -> SubPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) return mk_sub<Skip>();
            else if constexpr (std::is_same_v<T, Assign>) {
                const auto* bp = std::get_if<BPath>(&n.target.v);
                if (!bp) throw ResolveError("assignment target is not a Booster path");
                TypeRef tt, st;
                OPath target = resolve_bpath(env, *bp, &tt);
                if (target.start.kind == RefStart::Kind::Var && target.targets.empty())
                    throw ResolveError("cannot assign to bound variable '" + target.start.name +
                                       "'");
                if (target.start.kind == RefStart::Kind::Io && target.targets.empty() &&
                    target.start.name.back() == '?')
                    throw ResolveError("cannot assign to input '" + target.start.name + "'");
                ExprPtr src = resolve_expr(env, n.source, &st);
                if (!base_compatible(tt, st))
                    throw ResolveError("assigning a value of the wrong type to " +
                                       print_path(Path{target}));
                return mk_sub<Assign>(Path{std::move(target)}, src);
            } else if constexpr (std::is_same_v<T, Guard>) {
                // creation conjuncts bind fresh outputs for the guard's scope
                GuardInfo info = analyze_guard(n.cond);
                TypingEnv inner = env;
                for (const auto& [name, cls] : info.creations) {
                    if (!env.model->find_class(cls))
                        throw ResolveError("creation of unknown class '" + cls + "'");
                    inner.io[name] = {Base::cls(cls), PropKind::One, true};
                }
                TypeRef t;
                ExprPtr c = resolve_expr(inner, n.cond, &t);
                if (t.known && t.base.kind != Base::Kind::Bool)
                    throw ResolveError("guard must be boolean");
                return mk_sub<Guard>(c, resolve_substitution(inner, n.body));
            } else if constexpr (std::is_same_v<T, Par>)
                return mk_sub<Par>(resolve_substitution(env, n.lhs),
                                   resolve_substitution(env, n.rhs));
            else if constexpr (std::is_same_v<T, SeqC>)
                return mk_sub<SeqC>(resolve_substitution(env, n.lhs),
                                    resolve_substitution(env, n.rhs));
            else if constexpr (std::is_same_v<T, Choice>)
                return mk_sub<Choice>(resolve_substitution(env, n.lhs),
                                      resolve_substitution(env, n.rhs));
            else {
                // All / Any
                if (detail::name_in_scope(env, n.var))
                    throw ResolveError("bound variable '" + n.var +
                                       "' shadows a name in the enclosing scope");
                TypeRef rt;
                ExprPtr range = resolve_expr(env, n.range, &rt);
                if (rt.known && !rt.is_collection_type())
                    throw ResolveError("iterator range must be a collection");
                TypingEnv inner = env;
                inner.locals[n.var] = {rt.base, PropKind::One, rt.known};
                SubPtr body = resolve_substitution(inner, n.body);
                if constexpr (std::is_same_v<T, All>)
                    return mk_sub<All>(n.var, range, body);
                else
                    return mk_sub<Any>(n.var, range, body);
            }
        },
        s->v);
}

/// Typing environment for one operation: inputs/outputs come from the guard
/// conjuncts, integer/boolean outputs may also be inferred from a direct
/// assignment.
inline TypingEnv build_op_env(const BoosterModel& m, const std::string& cls, const SubPtr& body) {
    TypingEnv env;
    env.model = &m;
    env.ctx_class = cls;
    if (!m.find_class(cls)) throw ResolveError("unknown class '" + cls + "'");

    GuardInfo info;
    if (const auto* g = std::get_if<Guard>(&body->v)) info = analyze_guard(g->cond);
    for (const auto& [name, c] : info.creations) {
        if (!m.find_class(c)) throw ResolveError("creation of unknown class '" + c + "'");
        env.io[name] = {Base::cls(c), PropKind::One, true};
    }
    for (const auto& chk : info.checks) {
        const auto& b = std::get<Binary>(chk->v);
        auto head = detail::bare_head(b.lhs);
        std::string name = decorate(head->first, head->second);
        if (const auto* ex = std::get_if<ExtentE>(&b.rhs->v))
            env.io[name] = {Base::cls(ex->cls), PropKind::One, true};
        else if (const auto* so = std::get_if<SetOfE>(&b.rhs->v))
            env.io[name] = {Base::value_set(so->set), PropKind::Set, true};
        else if (!env.io.count(name))
            throw ResolveError("input '" + name +
                               "' must be typed by an extent(...) or set(...) conjunct");
    }

    // Infer output types from direct assignments `x! := e`.
    struct Alg {
        TypingEnv* env;
        int on_skip() const { return 0; }
        int on_assign(const Assign& a) const {
            const auto* bp = std::get_if<BPath>(&a.target.v);
            if (!bp || bp->segments.size() != 1 || bp->segments[0].decor != Decor::Out) return 0;
            std::string name = decorate(bp->segments[0].name, Decor::Out);
            if (env->io.count(name)) return 0;
            TypeRef t = TypeRef::unknown();
            try {
                resolve_expr(*env, a.source, &t);
            } catch (const ResolveError&) {
                return 0; // leave it missing; resolution will report it properly
            }
            if (t.known) env->io[name] = t;
            return 0;
        }
        int on_guard(ExprPtr, int) const { return 0; }
        int on_par(int, int) const { return 0; }
        int on_seq(int, int) const { return 0; }
        int on_choice(int, int) const { return 0; }
        int on_all(const std::string&, ExprPtr, int) const { return 0; }
        int on_any(const std::string&, ExprPtr, int) const { return 0; }
    } alg{&env};
    fold_substitution<int>(*body, alg);
    return env;
}

struct ResolvedOp {
    TypingEnv env;
    SubPtr body; // Object-staged
};

inline ResolvedOp resolve_operation(const BoosterModel& m, const std::string& cls,
                                    const std::string& op) {
    const ClassDecl* cd = m.find_class(cls);
    if (!cd) throw ResolveError("unknown class '" + cls + "'");
    const OperationDecl* od = cd->find_operation(op);
    if (!od) throw ResolveError("class " + cls + " has no operation '" + op + "'");
    ResolvedOp r;
    r.env = build_op_env(m, cls, od->body);
    r.body = resolve_substitution(r.env, od->body);
    return r;
}

// ---------------------------------------------------------------------------
// Object→Table translation: classify each navigation step by the table
// that stores it

/// Storage classification of a declared property. Exactly one of the four
/// holds for every (class, property) pair.
enum class StorageKind { BiAssoc, ClassColumn, SetTable, SeqTable };

inline StorageKind classify_property(const BoosterModel& m, const IdenProperty& ip) {
    const PropertyDecl* pd = m.find_property(ip.cls, ip.prop);
    if (!pd) throw ResolveError("unknown attribute " + ip.cls + "." + ip.prop);
    if (pd->opposite) return StorageKind::BiAssoc;
    if (pd->kind == PropKind::Set) return StorageKind::SetTable;
    if (pd->kind == PropKind::Seq) return StorageKind::SeqTable;
    return StorageKind::ClassColumn;
}

ExprPtr obj_to_tab_expr(const BoosterModel& m, const ExprPtr& e);

inline TPath obj_to_tab_path(const BoosterModel& m, const OPath& p) {
    TPath out;
    out.start = p.start;
    if (out.start.index) out.start.index = obj_to_tab_expr(m, out.start.index);
    for (const auto& t : p.targets) {
        if (t.indexed) {
            out.accesses.push_back(
                {TAccessKind::SeqTC, t.prop, obj_to_tab_expr(m, t.index)});
            continue;
        }
        TAccessKind k = TAccessKind::ClassT;
        switch (classify_property(m, t.prop)) {
            case StorageKind::BiAssoc: k = TAccessKind::AssocT; break;
            case StorageKind::ClassColumn: k = TAccessKind::ClassT; break;
            case StorageKind::SetTable: k = TAccessKind::SetT; break;
            case StorageKind::SeqTable: k = TAccessKind::SeqT; break;
        }
        out.accesses.push_back({k, t.prop, nullptr});
    }
    return out;
}

/// Homomorphic map replacing every object path with its table path.
inline ExprPtr obj_to_tab_expr(const BoosterModel& m, const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, PathExpr>) {
                const auto* op = std::get_if<OPath>(&n.path.v);
                if (!op) throw ResolveError("expression is not Object-staged");
                return mk_path(Path{obj_to_tab_path(m, *op)});
            } else if constexpr (std::is_same_v<T, Unary>)
                return mk_expr<Unary>(n.op, obj_to_tab_expr(m, n.arg));
            else if constexpr (std::is_same_v<T, Binary>)
                return mk_bin(n.op, obj_to_tab_expr(m, n.lhs), obj_to_tab_expr(m, n.rhs));
            else if constexpr (std::is_same_v<T, Card>)
                return mk_expr<Card>(obj_to_tab_expr(m, n.arg));
            else if constexpr (std::is_same_v<T, UnionE>)
                return mk_expr<UnionE>(obj_to_tab_expr(m, n.lhs), obj_to_tab_expr(m, n.rhs));
            else if constexpr (std::is_same_v<T, ConcatE>)
                return mk_expr<ConcatE>(obj_to_tab_expr(m, n.lhs), obj_to_tab_expr(m, n.rhs));
            else if constexpr (std::is_same_v<T, SeqDisplay>) {
                std::vector<ExprPtr> xs;
                for (const auto& x : n.elems) xs.push_back(obj_to_tab_expr(m, x));
                return mk_expr<SeqDisplay>(std::move(xs));
            } else if constexpr (std::is_same_v<T, SetDisplay>) {
                std::vector<ExprPtr> xs;
                for (const auto& x : n.elems) xs.push_back(obj_to_tab_expr(m, x));
                return mk_expr<SetDisplay>(std::move(xs));
            } else if constexpr (std::is_same_v<T, InsE>)
                return mk_expr<InsE>(obj_to_tab_expr(m, n.seq), obj_to_tab_expr(m, n.index),
                                     obj_to_tab_expr(m, n.elem));
            else
                return e; // literals, extent, set-of, undefined
        },
        e->v);
}

inline SubPtr obj_to_tab_substitution(const BoosterModel& m, const SubPtr& s) {
    struct Alg {
        const BoosterModel& m;
        SubPtr on_skip() const { return mk_sub<Skip>(); }
        SubPtr on_assign(const Assign& a) const {
            const auto* op = std::get_if<OPath>(&a.target.v);
            if (!op) throw ResolveError("assignment target is not Object-staged");
            return mk_sub<Assign>(Path{obj_to_tab_path(m, *op)}, obj_to_tab_expr(m, a.source));
        }
        SubPtr on_guard(ExprPtr c, SubPtr b) const {
            return mk_sub<Guard>(obj_to_tab_expr(m, c), b);
        }
        SubPtr on_par(SubPtr l, SubPtr r) const { return mk_sub<Par>(l, r); }
        SubPtr on_seq(SubPtr l, SubPtr r) const { return mk_sub<SeqC>(l, r); }
        SubPtr on_choice(SubPtr l, SubPtr r) const { return mk_sub<Choice>(l, r); }
        SubPtr on_all(const std::string& v, ExprPtr e, SubPtr b) const {
            return mk_sub<All>(v, obj_to_tab_expr(m, e), b);
        }
        SubPtr on_any(const std::string& v, ExprPtr e, SubPtr b) const {
            return mk_sub<Any>(v, obj_to_tab_expr(m, e), b);
        }
    } alg{m};
    return fold_substitution<SubPtr>(*s, alg);
}

} // namespace boosql
