#pragma once

// Executable relational semantics of GSL over object states. eval_gsl yields
// the finite set of reachable (state, io) pairs. Parallel composition is
// evaluated as primary-write sets read against the shared pre-state, merged
// at combinator boundaries (equal overlapping writes merge, differing ones
// conflict), with a single opposition-closure pass when a full state is
// materialised.

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "boosql/resolve.hpp"

namespace boosql {

// ---------------------------------------------------------------------------
// Values

struct EnumMember {
    std::string set, member;
    friend bool operator==(const EnumMember&, const EnumMember&) = default;
    friend auto operator<=>(const EnumMember&, const EnumMember&) = default;
};

struct Value;
int value_cmp(const Value& a, const Value& b);

struct Value {
    enum class Kind { Undefined, Int, Str, Bool, Enum, Ref, SetV, SeqV };
    Kind kind = Kind::Undefined;
    long long num = 0;       // Int, Bool (0/1), Ref (oid)
    std::string text;        // Str
    EnumMember enum_member;  // Enum
    std::vector<Value> elems; // SetV (canonically sorted, deduplicated), SeqV

    static Value undefined() { return {}; }
    static Value integer(long long v) { return {Kind::Int, v, {}, {}, {}}; }
    static Value boolean(bool b) { return {Kind::Bool, b ? 1 : 0, {}, {}, {}}; }
    static Value string(std::string s) { return {Kind::Str, 0, std::move(s), {}, {}}; }
    static Value enum_v(std::string set, std::string member) {
        return {Kind::Enum, 0, {}, {std::move(set), std::move(member)}, {}};
    }
    static Value ref(int oid) { return {Kind::Ref, oid, {}, {}, {}}; }
    static Value seq(std::vector<Value> xs) { return {Kind::SeqV, 0, {}, {}, std::move(xs)}; }
    static Value set(std::vector<Value> xs) {
        Value v{Kind::SetV, 0, {}, {}, std::move(xs)};
        std::sort(v.elems.begin(), v.elems.end(),
                  [](const Value& a, const Value& b) { return value_cmp(a, b) < 0; });
        v.elems.erase(std::unique(v.elems.begin(), v.elems.end(),
                                  [](const Value& a, const Value& b) {
                                      return value_cmp(a, b) == 0;
                                  }),
                      v.elems.end());
        return v;
    }

    bool is_defined() const { return kind != Kind::Undefined; }
    bool is_collection() const { return kind == Kind::SetV || kind == Kind::SeqV; }
    bool truthy() const { return kind == Kind::Bool && num != 0; }
};

inline int value_cmp(const Value& a, const Value& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    switch (a.kind) {
        case Value::Kind::Undefined: return 0;
        case Value::Kind::Int:
        case Value::Kind::Bool:
        case Value::Kind::Ref:
            return a.num < b.num ? -1 : a.num > b.num ? 1 : 0;
        case Value::Kind::Str:
            return a.text < b.text ? -1 : a.text > b.text ? 1 : 0;
        case Value::Kind::Enum: {
            if (a.enum_member == b.enum_member) return 0;
            return a.enum_member < b.enum_member ? -1 : 1;
        }
        default: {
            size_t n = std::min(a.elems.size(), b.elems.size());
            for (size_t i = 0; i < n; ++i)
                if (int c = value_cmp(a.elems[i], b.elems[i])) return c;
            if (a.elems.size() != b.elems.size())
                return a.elems.size() < b.elems.size() ? -1 : 1;
            return 0;
        }
    }
}

inline bool operator==(const Value& a, const Value& b) { return value_cmp(a, b) == 0; }

inline std::string value_str(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Undefined: return "undef";
        case Value::Kind::Int: return std::to_string(v.num);
        case Value::Kind::Bool: return v.num ? "true" : "false";
        case Value::Kind::Ref: return "#" + std::to_string(v.num);
        case Value::Kind::Str: return "\"" + v.text + "\"";
        case Value::Kind::Enum: return v.enum_member.set + "." + v.enum_member.member;
        case Value::Kind::SetV:
        case Value::Kind::SeqV: {
            std::string out = v.kind == Value::Kind::SetV ? "{" : "<";
            for (size_t i = 0; i < v.elems.size(); ++i) {
                if (i) out += ", ";
                out += value_str(v.elems[i]);
            }
            out += v.kind == Value::Kind::SetV ? "}" : ">";
            return out;
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Object states

using IoMap = std::map<std::string, Value>;

struct ObjState {
    std::shared_ptr<const BoosterModel> model;
    std::map<std::string, std::set<int>> extent;
    // class -> oid -> property -> value
    std::map<std::string, std::map<int, std::map<std::string, Value>>> values;

    static ObjState empty(std::shared_ptr<const BoosterModel> m) {
        ObjState s;
        s.model = std::move(m);
        for (const auto& c : s.model->classes) {
            s.extent[c.name];
            s.values[c.name];
        }
        return s;
    }

    const Value& get(const std::string& cls, int oid, const std::string& prop) const {
        auto ci = values.find(cls);
        if (ci == values.end()) throw EvalError(EvalError::Kind::Other, "unknown class " + cls);
        auto oi = ci->second.find(oid);
        if (oi == ci->second.end())
            throw EvalError(EvalError::Kind::UndefinedDeref,
                            "no live object " + cls + "(" + std::to_string(oid) + ")");
        auto pi = oi->second.find(prop);
        if (pi == oi->second.end())
            throw EvalError(EvalError::Kind::Other, cls + " has no property " + prop);
        return pi->second;
    }
    void put(const std::string& cls, int oid, const std::string& prop, Value v) {
        values[cls][oid][prop] = std::move(v);
    }

    /// Fresh object with every property initialised per its kind.
    int allocate(const std::string& cls) {
        const ClassDecl* cd = model->find_class(cls);
        if (!cd) throw EvalError(EvalError::Kind::Other, "unknown class " + cls);
        int oid = extent[cls].empty() ? 1 : *extent[cls].rbegin() + 1;
        extent[cls].insert(oid);
        auto& props = values[cls][oid];
        for (const auto& p : cd->properties) {
            switch (p.kind) {
                case PropKind::Set: props[p.name] = Value::set({}); break;
                case PropKind::Seq: props[p.name] = Value::seq({}); break;
                default: props[p.name] = Value::undefined();
            }
        }
        return oid;
    }

    friend bool operator==(const ObjState& a, const ObjState& b) {
        if (a.extent != b.extent) return false;
        if (a.values.size() != b.values.size()) return false;
        for (const auto& [cls, objs] : a.values) {
            auto it = b.values.find(cls);
            if (it == b.values.end() || it->second.size() != objs.size()) return false;
            for (const auto& [oid, props] : objs) {
                auto oi = it->second.find(oid);
                if (oi == it->second.end() || oi->second.size() != props.size()) return false;
                for (const auto& [p, v] : props) {
                    auto pi = oi->second.find(p);
                    if (pi == oi->second.end() || !(pi->second == v)) return false;
                }
            }
        }
        return true;
    }
};

inline bool io_equal(const IoMap& a, const IoMap& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it == b.end() || !(it->second == v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Expression evaluation (strict)

namespace gsl_eval {

inline long long as_int(const Value& v) {
    if (v.kind != Value::Kind::Int)
        throw EvalError(EvalError::Kind::TypeMismatch, "expected an integer, got " +
                                                           value_str(v));
    return v.num;
}
inline bool as_bool(const Value& v) {
    if (v.kind != Value::Kind::Bool)
        throw EvalError(EvalError::Kind::TypeMismatch, "expected a boolean, got " +
                                                           value_str(v));
    return v.num != 0;
}

struct EvalCtx {
    const ObjState* state;
    const IoMap* io;
    std::map<std::string, Value> locals;

    Value io_value(const std::string& name) const {
        auto it = io->find(name);
        if (it == io->end())
            throw EvalError(EvalError::Kind::Other, "unbound input/output '" + name + "'");
        return it->second;
    }
};

Value eval_expr_ctx(const EvalCtx& ctx, const ExprPtr& e);

/// Navigate one property access from a reference value.
inline Value nav(const EvalCtx& ctx, const Value& cur, const IdenProperty& prop,
                 const ExprPtr& index) {
    if (!cur.is_defined())
        throw EvalError(EvalError::Kind::UndefinedDeref,
                        "navigation through an undefined value at ." + prop.prop);
    if (cur.kind != Value::Kind::Ref)
        throw EvalError(EvalError::Kind::TypeMismatch,
                        "navigation through a non-object value at ." + prop.prop);
    Value v = ctx.state->get(prop.cls, static_cast<int>(cur.num), prop.prop);
    if (!index) return v;
    if (v.kind != Value::Kind::SeqV)
        throw EvalError(EvalError::Kind::TypeMismatch, "indexing a non-sequence value");
    long long i = as_int(eval_expr_ctx(ctx, index));
    if (i < 1 || i > static_cast<long long>(v.elems.size()))
        throw EvalError(EvalError::Kind::IndexOutOfRange,
                        "index " + std::to_string(i) + " out of range 1.." +
                            std::to_string(v.elems.size()));
    return v.elems[static_cast<size_t>(i - 1)];
}

/// Head value of an object/table path; the two stages navigate identically.
inline Value start_value(const EvalCtx& ctx, const RefStart& start) {
    switch (start.kind) {
        case RefStart::Kind::This: return ctx.io_value("this");
        case RefStart::Kind::Io: return ctx.io_value(start.name);
        case RefStart::Kind::Var: {
            auto it = ctx.locals.find(start.name);
            if (it == ctx.locals.end())
                throw EvalError(EvalError::Kind::Other,
                                "unbound variable '" + start.name + "'");
            return it->second;
        }
        case RefStart::Kind::SC: {
            Value self = ctx.io_value("this");
            return nav(ctx, self, start.prop, start.index);
        }
    }
    throw EvalError(EvalError::Kind::Other, "bad path start");
}

inline Value eval_path(const EvalCtx& ctx, const Path& p) {
    return std::visit(
        [&](const auto& q) -> Value {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, BPath>)
                throw EvalError(EvalError::Kind::Other,
                                "cannot evaluate an unresolved Booster path");
            else if constexpr (std::is_same_v<T, OPath>) {
                Value cur = start_value(ctx, q.start);
                for (const auto& t : q.targets)
                    cur = nav(ctx, cur, t.prop, t.indexed ? t.index : nullptr);
                return cur;
            } else {
                Value cur = start_value(ctx, q.start);
                for (const auto& a : q.accesses)
                    cur = nav(ctx, cur, a.prop,
                              a.kind == TAccessKind::SeqTC ? a.index : nullptr);
                return cur;
            }
        },
        p.v);
}

inline bool member_of(const Value& x, const Value& coll) {
    if (!coll.is_collection())
        throw EvalError(EvalError::Kind::TypeMismatch, "':' needs a collection");
    if (x.is_collection()) { // subset reading for collection operands
        for (const auto& e : x.elems)
            if (!member_of(e, coll)) return false;
        return true;
    }
    for (const auto& e : coll.elems)
        if (e == x) return true;
    return false;
}

inline Value eval_expr_ctx(const EvalCtx& ctx, const ExprPtr& e) {
    return std::visit(
        [&](const auto& n) -> Value {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLit>) return Value::integer(n.value);
            else if constexpr (std::is_same_v<T, StrLit>) return Value::string(n.value);
            else if constexpr (std::is_same_v<T, BoolLit>) return Value::boolean(n.value);
            else if constexpr (std::is_same_v<T, EnumLit>) return Value::enum_v(n.set, n.member);
            else if constexpr (std::is_same_v<T, PathExpr>) return eval_path(ctx, n.path);
            else if constexpr (std::is_same_v<T, UndefinedE>) return Value::undefined();
            else if constexpr (std::is_same_v<T, Unary>) {
                Value a = eval_expr_ctx(ctx, n.arg);
                if (n.op == UnOp::Neg) return Value::integer(-as_int(a));
                return Value::boolean(!as_bool(a));
            } else if constexpr (std::is_same_v<T, Binary>) {
                switch (n.op) {
                    case BinOp::And: {
                        if (!as_bool(eval_expr_ctx(ctx, n.lhs))) return Value::boolean(false);
                        return Value::boolean(as_bool(eval_expr_ctx(ctx, n.rhs)));
                    }
                    case BinOp::Or: {
                        if (as_bool(eval_expr_ctx(ctx, n.lhs))) return Value::boolean(true);
                        return Value::boolean(as_bool(eval_expr_ctx(ctx, n.rhs)));
                    }
                    case BinOp::Implies: {
                        if (!as_bool(eval_expr_ctx(ctx, n.lhs))) return Value::boolean(true);
                        return Value::boolean(as_bool(eval_expr_ctx(ctx, n.rhs)));
                    }
                    default: break;
                }
                Value l = eval_expr_ctx(ctx, n.lhs);
                Value r = eval_expr_ctx(ctx, n.rhs);
                switch (n.op) {
                    case BinOp::Add: return Value::integer(as_int(l) + as_int(r));
                    case BinOp::Sub: return Value::integer(as_int(l) - as_int(r));
                    case BinOp::Mul: return Value::integer(as_int(l) * as_int(r));
                    case BinOp::Eq: return Value::boolean(l == r);
                    case BinOp::Ne: return Value::boolean(!(l == r));
                    case BinOp::Lt: return Value::boolean(as_int(l) < as_int(r));
                    case BinOp::Le: return Value::boolean(as_int(l) <= as_int(r));
                    case BinOp::Gt: return Value::boolean(as_int(l) > as_int(r));
                    case BinOp::Ge: return Value::boolean(as_int(l) >= as_int(r));
                    case BinOp::In: return Value::boolean(member_of(l, r));
                    default:
                        throw EvalError(EvalError::Kind::Other, "unreachable operator");
                }
            } else if constexpr (std::is_same_v<T, Card>) {
                Value a = eval_expr_ctx(ctx, n.arg);
                if (!a.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "card(...) of a non-collection");
                return Value::integer(static_cast<long long>(a.elems.size()));
            } else if constexpr (std::is_same_v<T, UnionE>) {
                Value l = eval_expr_ctx(ctx, n.lhs);
                Value r = eval_expr_ctx(ctx, n.rhs);
                if (l.kind != Value::Kind::SetV || !r.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch, "union needs sets");
                std::vector<Value> xs = l.elems;
                for (const auto& x : r.elems) xs.push_back(x);
                return Value::set(std::move(xs));
            } else if constexpr (std::is_same_v<T, ConcatE>) {
                Value l = eval_expr_ctx(ctx, n.lhs);
                Value r = eval_expr_ctx(ctx, n.rhs);
                if (l.kind != Value::Kind::SeqV || !r.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "concatenation needs sequences");
                std::vector<Value> xs = l.elems;
                // a set operand contributes its elements in canonical order
                for (const auto& x : r.elems) xs.push_back(x);
                return Value::seq(std::move(xs));
            } else if constexpr (std::is_same_v<T, SeqDisplay>) {
                std::vector<Value> xs;
                for (const auto& x : n.elems) xs.push_back(eval_expr_ctx(ctx, x));
                return Value::seq(std::move(xs));
            } else if constexpr (std::is_same_v<T, SetDisplay>) {
                std::vector<Value> xs;
                for (const auto& x : n.elems) xs.push_back(eval_expr_ctx(ctx, x));
                return Value::set(std::move(xs));
            } else if constexpr (std::is_same_v<T, InsE>) {
                Value s = eval_expr_ctx(ctx, n.seq);
                long long i = as_int(eval_expr_ctx(ctx, n.index));
                Value x = eval_expr_ctx(ctx, n.elem);
                if (s.kind != Value::Kind::SeqV)
                    throw EvalError(EvalError::Kind::TypeMismatch, "ins(...) of a non-sequence");
                if (i < 1 || i > static_cast<long long>(s.elems.size()) + 1)
                    throw EvalError(EvalError::Kind::IndexOutOfRange,
                                    "insertion position " + std::to_string(i) +
                                        " out of range 1.." +
                                        std::to_string(s.elems.size() + 1));
                std::vector<Value> xs = s.elems;
                xs.insert(xs.begin() + static_cast<long>(i - 1), x);
                return Value::seq(std::move(xs));
            } else if constexpr (std::is_same_v<T, ExtentE>) {
                auto it = ctx.state->extent.find(n.cls);
                if (it == ctx.state->extent.end())
                    throw EvalError(EvalError::Kind::Other, "unknown class " + n.cls);
                std::vector<Value> xs;
                for (int oid : it->second) xs.push_back(Value::ref(oid));
                return Value::set(std::move(xs));
            } else { // SetOfE
                const ValueSetDecl* vs = ctx.state->model->find_value_set(n.set);
                if (!vs)
                    throw EvalError(EvalError::Kind::Other, "unknown value set " + n.set);
                std::vector<Value> xs;
                for (const auto& mbr : vs->members) xs.push_back(Value::enum_v(n.set, mbr));
                return Value::set(std::move(xs));
            }
        },
        e->v);
}

} // namespace gsl_eval

/// Strict evaluation of an Object-staged expression.
inline Value eval_expr(const ObjState& s, const IoMap& io,
                       const std::map<std::string, Value>& locals, const ExprPtr& e) {
    gsl_eval::EvalCtx ctx{&s, &io, locals};
    return gsl_eval::eval_expr_ctx(ctx, e);
}

// ---------------------------------------------------------------------------
// Program evaluation

namespace gsl_eval {

struct WriteKey {
    std::string cls;
    int oid;
    std::string prop;
    friend auto operator<=>(const WriteKey&, const WriteKey&) = default;
};

struct Delta {
    std::map<WriteKey, Value> writes;
    IoMap io_writes;
    std::vector<std::pair<std::string, int>> fresh; // (class, oid)
};

inline Delta merge_deltas(const Delta& a, const Delta& b) {
    Delta out = a;
    for (const auto& [k, v] : b.writes) {
        auto it = out.writes.find(k);
        if (it != out.writes.end() && !(it->second == v))
            throw EvalError(EvalError::Kind::ParConflict,
                            "conflicting parallel writes to " + k.cls + "(" +
                                std::to_string(k.oid) + ")." + k.prop);
        out.writes[k] = v;
    }
    for (const auto& [k, v] : b.io_writes) {
        auto it = out.io_writes.find(k);
        if (it != out.io_writes.end() && !(it->second == v))
            throw EvalError(EvalError::Kind::ParConflict,
                            "conflicting parallel writes to output " + k);
        out.io_writes[k] = v;
    }
    for (const auto& f : b.fresh) out.fresh.push_back(f);
    return out;
}

/// Collect the object ids referenced by a property value (scalar or collection).
inline std::set<int> ref_set(const Value& v) {
    std::set<int> out;
    if (v.kind == Value::Kind::Ref) out.insert(static_cast<int>(v.num));
    if (v.is_collection())
        for (const auto& e : v.elems)
            if (e.kind == Value::Kind::Ref) out.insert(static_cast<int>(e.num));
    return out;
}

/// Apply primary writes, then restore opposition consistency. Ends written
/// explicitly are checked, not re-patched; inconsistent explicit writes are
/// parallel conflicts.
inline void apply_with_closure(ObjState& s, const ObjState& pre, const Delta& d) {
    // fresh objects first (deltas from sequentially-composed sub-programs may
    // carry allocations); their properties start at the kind defaults and the
    // delta's writes fill them in
    for (const auto& [cls, oid] : d.fresh) {
        const ClassDecl* cd = s.model->find_class(cls);
        if (!cd) throw EvalError(EvalError::Kind::Other, "unknown class " + cls);
        s.extent[cls].insert(oid);
        auto& props = s.values[cls][oid];
        for (const auto& p : cd->properties)
            if (!props.count(p.name))
                props[p.name] = p.kind == PropKind::Set   ? Value::set({})
                                : p.kind == PropKind::Seq ? Value::seq({})
                                                          : Value::undefined();
    }

    struct Change {
        WriteKey key;
        Value oldv, newv;
    };
    std::vector<Change> queue;
    std::set<WriteKey> primary;
    for (const auto& [k, v] : d.writes) {
        Value oldv = s.get(k.cls, k.oid, k.prop);
        s.put(k.cls, k.oid, k.prop, v);
        queue.push_back({k, oldv, v});
        primary.insert(k);
    }

    const BoosterModel& m = *s.model;
    size_t qi = 0;
    while (qi < queue.size()) {
        Change ch = queue[qi++];
        const PropertyDecl* pd = m.find_property(ch.key.cls, ch.key.prop);
        if (!pd || !pd->opposite) continue;
        const IdenProperty opp = *pd->opposite;
        const PropertyDecl* qd = m.find_property(opp.cls, opp.prop);

        std::set<int> before = ref_set(ch.oldv);
        std::set<int> after = ref_set(ch.newv);
        Value self = Value::ref(ch.key.oid);

        auto contains_self = [&](const Value& v) {
            if (v.kind == Value::Kind::Ref) return v == self;
            if (v.is_collection()) {
                for (const auto& e : v.elems)
                    if (e == self) return true;
            }
            return false;
        };

        for (int b : after) {
            if (before.count(b)) continue;
            WriteKey bk{opp.cls, b, opp.prop};
            Value cur = s.get(bk.cls, bk.oid, bk.prop);
            if (contains_self(cur)) continue;
            if (primary.count(bk))
                throw EvalError(EvalError::Kind::ParConflict,
                                "parallel writes disagree about the link between " +
                                    ch.key.cls + "(" + std::to_string(ch.key.oid) + ")." +
                                    ch.key.prop + " and its opposite");
            Value next;
            switch (qd->kind) {
                case PropKind::Optional:
                case PropKind::One: next = self; break;
                case PropKind::Set: {
                    std::vector<Value> xs = cur.elems;
                    xs.push_back(self);
                    next = Value::set(std::move(xs));
                    break;
                }
                case PropKind::Seq: {
                    std::vector<Value> xs = cur.elems;
                    xs.push_back(self); // canonical restoration appends
                    next = Value::seq(std::move(xs));
                    break;
                }
            }
            s.put(bk.cls, bk.oid, bk.prop, next);
            queue.push_back({bk, cur, next});
        }

        for (int b : before) {
            if (after.count(b)) continue;
            WriteKey bk{opp.cls, b, opp.prop};
            Value cur = s.get(bk.cls, bk.oid, bk.prop);
            if (!contains_self(cur)) continue;
            if (primary.count(bk))
                throw EvalError(EvalError::Kind::ParConflict,
                                "parallel writes disagree about unlinking " + ch.key.cls +
                                    "(" + std::to_string(ch.key.oid) + ")." + ch.key.prop);
            Value next;
            if (cur.is_collection()) {
                std::vector<Value> xs;
                for (const auto& e : cur.elems)
                    if (!(e == self)) xs.push_back(e);
                next = cur.kind == Value::Kind::SetV ? Value::set(std::move(xs))
                                                     : Value::seq(std::move(xs));
            } else {
                next = Value::undefined();
            }
            s.put(bk.cls, bk.oid, bk.prop, next);
            queue.push_back({bk, cur, next});
        }
    }
    (void)pre;
}

using Results = std::vector<std::pair<ObjState, IoMap>>;

inline void push_result(Results& out, ObjState s, IoMap io) {
    for (const auto& [s2, io2] : out)
        if (s2 == s && io_equal(io2, io)) return;
    out.emplace_back(std::move(s), std::move(io));
}

Results eval_sub(const ObjState& s, const IoMap& io, const std::map<std::string, Value>& locals,
                 const SubPtr& prog);

/// Primary-write deltas of a substitution evaluated against the pre-state.
inline std::vector<Delta> delta_eval(const ObjState& s, const IoMap& io,
                                     const std::map<std::string, Value>& locals,
                                     const SubPtr& prog) {
    return std::visit(
        [&](const auto& n) -> std::vector<Delta> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) return {Delta{}};
            else if constexpr (std::is_same_v<T, Assign>) {
                EvalCtx ctx{&s, &io, locals};
                Delta d;
                const auto* op = std::get_if<OPath>(&n.target.v);
                const auto* tp = std::get_if<TPath>(&n.target.v);
                if (!op && !tp)
                    throw EvalError(EvalError::Kind::Other,
                                    "cannot execute an unresolved assignment target");
                // normalise both stages to (start, [(prop, index?)]) form
                RefStart start = op ? op->start : tp->start;
                std::vector<std::pair<IdenProperty, ExprPtr>> steps;
                if (op) {
                    for (const auto& t : op->targets)
                        steps.emplace_back(t.prop, t.indexed ? t.index : nullptr);
                } else {
                    for (const auto& a : tp->accesses)
                        steps.emplace_back(a.prop,
                                           a.kind == TAccessKind::SeqTC ? a.index : nullptr);
                }
                Value v = eval_expr_ctx(ctx, n.source);
                if (steps.empty()) {
                    if (start.kind == RefStart::Kind::SC) {
                        // indexed component of an implicit-this sequence
                        Value self = ctx.io_value("this");
                        WriteKey key{start.prop.cls, static_cast<int>(self.num),
                                     start.prop.prop};
                        Value seq = s.get(key.cls, key.oid, key.prop);
                        if (seq.kind != Value::Kind::SeqV)
                            throw EvalError(EvalError::Kind::TypeMismatch,
                                            "indexed assignment to a non-sequence");
                        long long i = as_int(eval_expr_ctx(ctx, start.index));
                        if (i < 1 || i > static_cast<long long>(seq.elems.size()))
                            throw EvalError(EvalError::Kind::IndexOutOfRange,
                                            "assignment index out of range");
                        std::vector<Value> xs = seq.elems;
                        xs[static_cast<size_t>(i - 1)] = v;
                        d.writes[key] = Value::seq(std::move(xs));
                        return {d};
                    }
                    if (start.kind != RefStart::Kind::Io || start.name.empty() ||
                        start.name.back() != '!')
                        throw EvalError(EvalError::Kind::Other,
                                        "invalid assignment target");
                    d.io_writes[start.name] = v;
                    return {d};
                }
                // navigate to the owner of the final step
                Value cur = start_value(ctx, start);
                for (size_t i = 0; i + 1 < steps.size(); ++i)
                    cur = nav(ctx, cur, steps[i].first, steps[i].second);
                if (cur.kind != Value::Kind::Ref)
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "assignment through a non-object value");
                const auto& [prop, index] = steps.back();
                WriteKey key{prop.cls, static_cast<int>(cur.num), prop.prop};
                if (index) {
                    Value seq = s.get(key.cls, key.oid, key.prop);
                    if (seq.kind != Value::Kind::SeqV)
                        throw EvalError(EvalError::Kind::TypeMismatch,
                                        "indexed assignment to a non-sequence");
                    long long i = as_int(eval_expr_ctx(ctx, index));
                    if (i < 1 || i > static_cast<long long>(seq.elems.size()))
                        throw EvalError(EvalError::Kind::IndexOutOfRange,
                                        "assignment index out of range");
                    std::vector<Value> xs = seq.elems;
                    xs[static_cast<size_t>(i - 1)] = v;
                    d.writes[key] = Value::seq(std::move(xs));
                } else {
                    d.writes[key] = v;
                }
                return {d};
            } else if constexpr (std::is_same_v<T, Guard>) {
                GuardInfo info = analyze_guard(n.cond);
                if (!info.creations.empty())
                    throw EvalError(EvalError::Kind::Other,
                                    "object creation inside parallel composition is not "
                                    "supported");
                EvalCtx ctx{&s, &io, locals};
                for (const auto& c : info.checks)
                    if (!as_bool(eval_expr_ctx(ctx, c))) return {Delta{}};
                for (const auto& c : info.residual)
                    if (!as_bool(eval_expr_ctx(ctx, c))) return {Delta{}};
                return delta_eval(s, io, locals, n.body);
            } else if constexpr (std::is_same_v<T, Par>) {
                std::vector<Delta> ls = delta_eval(s, io, locals, n.lhs);
                std::vector<Delta> rs = delta_eval(s, io, locals, n.rhs);
                std::vector<Delta> out;
                for (const auto& l : ls)
                    for (const auto& r : rs) out.push_back(merge_deltas(l, r));
                return out;
            } else if constexpr (std::is_same_v<T, SeqC>) {
                // full evaluation, then state difference
                Results rs = eval_sub(s, io, locals, prog);
                std::vector<Delta> out;
                for (const auto& [s2, io2] : rs) {
                    Delta d;
                    for (const auto& [cls, objs] : s2.values) {
                        auto pre_objs = s.values.find(cls);
                        for (const auto& [oid, props] : objs) {
                            bool fresh = pre_objs == s.values.end() ||
                                         !pre_objs->second.count(oid);
                            if (fresh) d.fresh.emplace_back(cls, oid);
                            for (const auto& [p, v] : props) {
                                if (!fresh) {
                                    const Value& before = pre_objs->second.at(oid).at(p);
                                    if (before == v) continue;
                                }
                                d.writes[{cls, oid, p}] = v;
                            }
                        }
                    }
                    for (const auto& [k, v] : io2)
                        if (!io.count(k) || !(io.at(k) == v)) d.io_writes[k] = v;
                    out.push_back(std::move(d));
                }
                return out;
            } else if constexpr (std::is_same_v<T, Choice>) {
                std::vector<Delta> out = delta_eval(s, io, locals, n.lhs);
                for (auto& d : delta_eval(s, io, locals, n.rhs)) out.push_back(std::move(d));
                return out;
            } else if constexpr (std::is_same_v<T, All>) {
                EvalCtx ctx{&s, &io, locals};
                Value range = eval_expr_ctx(ctx, n.range);
                if (!range.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "iterator range is not a collection");
                std::vector<Delta> acc{Delta{}};
                for (const auto& elem : range.elems) {
                    auto inner = locals;
                    inner[n.var] = elem;
                    std::vector<Delta> ds = delta_eval(s, io, inner, n.body);
                    std::vector<Delta> next;
                    for (const auto& a : acc)
                        for (const auto& d : ds) next.push_back(merge_deltas(a, d));
                    acc = std::move(next);
                }
                return acc;
            } else { // Any
                EvalCtx ctx{&s, &io, locals};
                Value range = eval_expr_ctx(ctx, n.range);
                if (!range.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "iterator range is not a collection");
                std::vector<Delta> out;
                for (const auto& elem : range.elems) {
                    auto inner = locals;
                    inner[n.var] = elem;
                    for (auto& d : delta_eval(s, io, inner, n.body))
                        out.push_back(std::move(d));
                }
                return out; // empty range: no transitions (infeasible)
            }
        },
        prog->v);
}

inline std::pair<ObjState, IoMap> materialise(const ObjState& s, const IoMap& io,
                                              const Delta& d) {
    ObjState s2 = s;
    IoMap io2 = io;
    apply_with_closure(s2, s, d);
    for (const auto& [k, v] : d.io_writes) io2[k] = v;
    return {std::move(s2), std::move(io2)};
}

inline Results eval_sub(const ObjState& s, const IoMap& io,
                        const std::map<std::string, Value>& locals, const SubPtr& prog) {
    return std::visit(
        [&](const auto& n) -> Results {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip>) return {{s, io}};
            else if constexpr (std::is_same_v<T, Guard>) {
                GuardInfo info = analyze_guard(n.cond);
                EvalCtx ctx{&s, &io, locals};
                for (const auto& c : info.checks)
                    if (!as_bool(eval_expr_ctx(ctx, c))) return {{s, io}};
                for (const auto& c : info.residual)
                    if (!as_bool(eval_expr_ctx(ctx, c))) return {{s, io}};
                ObjState s2 = s;
                IoMap io2 = io;
                for (const auto& [name, cls] : info.creations) {
                    int oid = s2.allocate(cls);
                    io2[name] = Value::ref(oid);
                }
                return eval_sub(s2, io2, locals, n.body);
            } else if constexpr (std::is_same_v<T, SeqC>) {
                Results first = eval_sub(s, io, locals, n.lhs);
                Results out;
                for (const auto& [s1, io1] : first)
                    for (auto& [s2, io2] : eval_sub(s1, io1, locals, n.rhs))
                        push_result(out, s2, io2);
                return out;
            } else if constexpr (std::is_same_v<T, Choice>) {
                Results out = eval_sub(s, io, locals, n.lhs);
                for (auto& [s2, io2] : eval_sub(s, io, locals, n.rhs))
                    push_result(out, s2, io2);
                return out;
            } else if constexpr (std::is_same_v<T, Any>) {
                EvalCtx ctx{&s, &io, locals};
                Value range = eval_expr_ctx(ctx, n.range);
                if (!range.is_collection())
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "iterator range is not a collection");
                Results out;
                for (const auto& elem : range.elems) {
                    auto inner = locals;
                    inner[n.var] = elem;
                    for (auto& [s2, io2] : eval_sub(s, io, inner, n.body))
                        push_result(out, s2, io2);
                }
                return out;
            } else {
                // Skip handled above; Assign, Par, All go through deltas
                Results out;
                for (const auto& d : delta_eval(s, io, locals, prog)) {
                    auto [s2, io2] = materialise(s, io, d);
                    push_result(out, std::move(s2), std::move(io2));
                }
                return out;
            }
        },
        prog->v);
}

} // namespace gsl_eval

/// The ⟦·⟧ interpreter: the finite set of (state, io) pairs reachable by one
/// run of `prog` from (s, io). A blocked guard contributes (s, io) unchanged.
inline std::vector<std::pair<ObjState, IoMap>> eval_gsl(const ObjState& s, const IoMap& io,
                                                        const SubPtr& prog) {
    return gsl_eval::eval_sub(s, io, {}, prog);
}

// ---------------------------------------------------------------------------
// Operations as extensional relations. The effect of one operation is the
// finite binary relation on (state, io) pairs obtained by running the
// interpreter from every supplied before-pair; left io components are
// restricted to the inputs, right components to the outputs.

struct OpRelation {
    std::set<std::string> input;
    std::set<std::string> output;
    using Pair = std::pair<ObjState, IoMap>;
    std::vector<std::pair<Pair, Pair>> effect;
};

struct OpRegistry {
    ObjState state;
    // class -> operation -> resolved body
    std::map<std::string, std::map<std::string, SubPtr>> relation;
};

inline IoMap restrict_io(const IoMap& io, const std::set<std::string>& dom) {
    IoMap out;
    for (const auto& [k, v] : io)
        if (dom.count(k)) out[k] = v;
    return out;
}

/// Materialise one operation's effect over the given before-pairs.
inline OpRelation op_relation(const BoosterModel& m, const std::string& cls,
                              const std::string& op,
                              const std::vector<std::pair<ObjState, IoMap>>& befores) {
    ResolvedOp r = resolve_operation(m, cls, op);
    OpRelation rel;
    rel.input.insert("this");
    for (const auto& [name, type] : r.env.io)
        (name.back() == '?' ? rel.input : rel.output).insert(name);
    for (const auto& [s, io] : befores) {
        IoMap in = restrict_io(io, rel.input);
        for (const auto& [s2, io2] : eval_gsl(s, io, r.body))
            rel.effect.push_back({{s, in}, {s2, restrict_io(io2, rel.output)}});
    }
    return rel;
}

/// Resolve and register every operation of the model; throws if any fails to
/// type-check in its class context.
inline OpRegistry build_registry(std::shared_ptr<const BoosterModel> m, ObjState state) {
    OpRegistry reg;
    reg.state = std::move(state);
    for (const auto& c : m->classes)
        for (const auto& op : c.operations)
            reg.relation[c.name][op.name] = resolve_operation(*m, c.name, op.name).body;
    return reg;
}

// ---------------------------------------------------------------------------
// State invariants (checked across the generated corpus after every step)

inline std::vector<std::string> check_obj_invariants(const ObjState& s) {
    std::vector<std::string> out;
    const BoosterModel& m = *s.model;
    for (const auto& c : m.classes)
        if (!s.extent.count(c.name))
            out.push_back("extent domain misses class " + c.name);
    for (const auto& [cls, oids] : s.extent)
        if (!m.find_class(cls)) out.push_back("extent of undeclared class " + cls);

    auto base_ok = [&](const Base& b, const Value& v) -> bool {
        switch (v.kind) {
            case Value::Kind::Int: return b.kind == Base::Kind::Int;
            case Value::Kind::Str: return b.kind == Base::Kind::Str;
            case Value::Kind::Bool: return b.kind == Base::Kind::Bool;
            case Value::Kind::Enum:
                return b.kind == Base::Kind::ValueSet && v.enum_member.set == b.name;
            case Value::Kind::Ref: {
                if (b.kind != Base::Kind::Class) return false;
                auto it = s.extent.find(b.name);
                return it != s.extent.end() && it->second.count(static_cast<int>(v.num));
            }
            default: return false;
        }
    };

    for (const auto& c : m.classes) {
        auto ext = s.extent.find(c.name);
        if (ext == s.extent.end()) continue;
        for (int oid : ext->second) {
            auto ci = s.values.find(c.name);
            auto oi = ci == s.values.end() ? decltype(ci->second.begin())()
                                           : ci->second.find(oid);
            if (ci == s.values.end() || oi == ci->second.end()) {
                out.push_back("live object " + c.name + "(" + std::to_string(oid) +
                              ") has no valuation");
                continue;
            }
            const auto& props = oi->second;
            if (props.size() != c.properties.size())
                out.push_back("valuation domain of " + c.name + "(" + std::to_string(oid) +
                              ") differs from the declared properties");
            for (const auto& p : c.properties) {
                auto pi = props.find(p.name);
                if (pi == props.end()) {
                    out.push_back(c.name + "(" + std::to_string(oid) + ") misses " + p.name);
                    continue;
                }
                const Value& v = pi->second;
                std::string where =
                    c.name + "(" + std::to_string(oid) + ")." + p.name;
                switch (p.kind) {
                    case PropKind::Optional:
                        if (v.is_defined() && !base_ok(p.target, v))
                            out.push_back("kind violation at " + where);
                        break;
                    case PropKind::One:
                        if (!v.is_defined() || !base_ok(p.target, v))
                            out.push_back("kind violation at " + where);
                        break;
                    case PropKind::Set:
                        if (v.kind != Value::Kind::SetV)
                            out.push_back("kind violation at " + where);
                        else
                            for (const auto& e : v.elems)
                                if (!base_ok(p.target, e))
                                    out.push_back("element violation at " + where);
                        break;
                    case PropKind::Seq:
                        if (v.kind != Value::Kind::SeqV)
                            out.push_back("kind violation at " + where);
                        else
                            for (const auto& e : v.elems)
                                if (!base_ok(p.target, e))
                                    out.push_back("element violation at " + where);
                        break;
                }
            }
        }
    }

    // opposition consistency
    for (const auto& c : m.classes) {
        for (const auto& p : c.properties) {
            if (!p.opposite) continue;
            auto ext = s.extent.find(c.name);
            if (ext == s.extent.end()) continue;
            for (int oid : ext->second) {
                Value v;
                try {
                    v = s.get(c.name, oid, p.name);
                } catch (const EvalError&) {
                    continue;
                }
                for (int b : gsl_eval::ref_set(v)) {
                    Value back;
                    try {
                        back = s.get(p.opposite->cls, b, p.opposite->prop);
                    } catch (const EvalError&) {
                        out.push_back("dangling link at " + c.name + "(" +
                                      std::to_string(oid) + ")." + p.name);
                        continue;
                    }
                    bool ok = back.kind == Value::Kind::Ref
                                  ? static_cast<int>(back.num) == oid
                                  : gsl_eval::ref_set(back).count(oid) > 0;
                    if (!ok)
                        out.push_back("opposition violated between " + c.name + "(" +
                                      std::to_string(oid) + ")." + p.name + " and " +
                                      p.opposite->cls + "(" + std::to_string(b) + ")." +
                                      p.opposite->prop);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line-oriented state serialisation (fixtures, failure reproduction)

inline std::string serialize_obj_state(const ObjState& s) {
    std::ostringstream os;
    for (const auto& [cls, oids] : s.extent) {
        os << "extent " << cls;
        for (int oid : oids) os << " " << oid;
        os << "\n";
    }
    for (const auto& [cls, objs] : s.values)
        for (const auto& [oid, props] : objs)
            for (const auto& [p, v] : props)
                os << cls << " " << oid << " " << p << " = " << value_str(v) << "\n";
    return os.str();
}

inline std::string serialize_io(const IoMap& io) {
    std::ostringstream os;
    for (const auto& [k, v] : io) os << k << " = " << value_str(v) << "\n";
    return os.str();
}

namespace gsl_eval {

inline Value parse_value_text(const std::string& text);

inline Value parse_value_tokens(const std::string& text, size_t& pos) {
    auto skip = [&] { while (pos < text.size() && std::isspace((unsigned char)text[pos])) pos++; };
    skip();
    if (pos >= text.size()) throw ParseError({0, (int)pos}, "empty value");
    char c = text[pos];
    if (c == '#') {
        pos++;
        size_t start = pos;
        while (pos < text.size() && std::isdigit((unsigned char)text[pos])) pos++;
        return Value::ref(std::stoi(text.substr(start, pos - start)));
    }
    if (c == '-' || std::isdigit((unsigned char)c)) {
        size_t start = pos;
        if (c == '-') pos++;
        while (pos < text.size() && std::isdigit((unsigned char)text[pos])) pos++;
        return Value::integer(std::stoll(text.substr(start, pos - start)));
    }
    if (c == '"') {
        pos++;
        size_t start = pos;
        while (pos < text.size() && text[pos] != '"') pos++;
        std::string sv = text.substr(start, pos - start);
        pos++;
        return Value::string(sv);
    }
    if (c == '{' || c == '<') {
        char close = c == '{' ? '}' : '>';
        pos++;
        std::vector<Value> xs;
        skip();
        while (pos < text.size() && text[pos] != close) {
            xs.push_back(parse_value_tokens(text, pos));
            skip();
            if (pos < text.size() && text[pos] == ',') { pos++; skip(); }
        }
        if (pos >= text.size()) throw ParseError({0, (int)pos}, "unterminated collection");
        pos++;
        return close == '}' ? Value::set(std::move(xs)) : Value::seq(std::move(xs));
    }
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum((unsigned char)text[pos]) || text[pos] == '_' || text[pos] == '.'))
        pos++;
    std::string word = text.substr(start, pos - start);
    if (word == "undef" || word == "undefined") return Value::undefined();
    if (word == "true") return Value::boolean(true);
    if (word == "false") return Value::boolean(false);
    if (auto dot = word.find('.'); dot != std::string::npos)
        return Value::enum_v(word.substr(0, dot), word.substr(dot + 1));
    throw ParseError({0, (int)pos}, "cannot parse value '" + word + "'");
}

inline Value parse_value_text(const std::string& text) {
    size_t pos = 0;
    return parse_value_tokens(text, pos);
}

} // namespace gsl_eval

using gsl_eval::parse_value_text;

/// Parse the line format written by serialize_obj_state.
inline ObjState parse_obj_state(std::shared_ptr<const BoosterModel> model,
                                const std::string& text) {
    ObjState s = ObjState::empty(std::move(model));
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno++;
        if (auto h = line.find("--"); h != std::string::npos) line = line.substr(0, h);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "extent") {
            std::string cls;
            ls >> cls;
            int oid;
            while (ls >> oid) {
                s.extent[cls].insert(oid);
                const ClassDecl* cd = s.model->find_class(cls);
                if (!cd) throw ParseError({lineno, 1}, "unknown class " + cls);
                for (const auto& p : cd->properties)
                    if (!s.values[cls][oid].count(p.name))
                        s.values[cls][oid][p.name] =
                            p.kind == PropKind::Set   ? Value::set({})
                            : p.kind == PropKind::Seq ? Value::seq({})
                                                      : Value::undefined();
            }
            continue;
        }
        std::string oid_s, prop, eq;
        ls >> oid_s >> prop >> eq;
        if (eq != "=") throw ParseError({lineno, 1}, "expected 'Class oid prop = value'");
        std::string rest;
        std::getline(ls, rest);
        s.values[first][std::stoi(oid_s)][prop] = parse_value_text(rest);
    }
    return s;
}

inline IoMap parse_io_text(const std::string& text) {
    IoMap io;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (auto h = line.find("--"); h != std::string::npos) line = line.substr(0, h);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        while (!key.empty() && std::isspace((unsigned char)key.back())) key.pop_back();
        while (!key.empty() && std::isspace((unsigned char)key.front())) key.erase(key.begin());
        if (key.empty()) continue;
        io[key] = parse_value_text(line.substr(eq + 1));
    }
    return io;
}

} // namespace boosql
