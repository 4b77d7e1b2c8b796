#pragma once

// Seeded random case generation for differential testing: small models, one
// well-typed operation drawn from the supported assignment matrix, and a
// consistent object state with well-typed inputs. Everything derives
// deterministically from the seed (own PRNG, no stdlib distributions).

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "boosql/verify.hpp"

namespace boosql {

/// splitmix64; deterministic across platforms.
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// inclusive
    int range(int lo, int hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<int>(next() % static_cast<uint64_t>(hi - lo + 1));
    }
    bool coin() { return next() & 1; }
};

struct GenBounds {
    int max_objects = 3;
    int max_elems = 3;
};

struct GeneratedCase {
    std::shared_ptr<const BoosterModel> model;
    std::string cls;
    std::string op;
    ObjState state;
    IoMap io;
    std::string template_name;
    bool expect_blocked = false;
};

namespace gen {

inline const std::vector<std::string>& colours() {
    static const std::vector<std::string> c{"amber", "blue", "green", "red"};
    return c;
}

inline std::string colour(Rng& rng) {
    return colours()[static_cast<size_t>(rng.range(0, (int)colours().size() - 1))];
}

/// Fill every primitive one/optional property of a fresh object with a value
/// (one-kind properties must be defined; class-valued ones stay for linking).
inline void fill_scalars(ObjState& s, Rng& rng, const std::string& cls, int oid) {
    const ClassDecl* cd = s.model->find_class(cls);
    for (const auto& p : cd->properties) {
        if (is_collection(p.kind) || p.target.kind == Base::Kind::Class) continue;
        bool give = p.kind == PropKind::One || rng.coin();
        if (!give) continue;
        Value v;
        switch (p.target.kind) {
            case Base::Kind::Int: v = Value::integer(rng.range(0, 9)); break;
            case Base::Kind::Str: v = Value::string("w" + std::to_string(rng.range(0, 9))); break;
            case Base::Kind::Bool: v = Value::boolean(rng.coin()); break;
            case Base::Kind::ValueSet: v = Value::enum_v(p.target.name, colour(rng)); break;
            default: break;
        }
        s.put(cls, oid, p.name, v);
    }
}

inline int add_obj(ObjState& s, Rng& rng, const std::string& cls) {
    int oid = s.allocate(cls);
    fill_scalars(s, rng, cls, oid);
    return oid;
}

/// Link a.p = b / a.p += b, updating the opposite end to match.
inline void link(ObjState& s, const IdenProperty& end, int a, int b) {
    const PropertyDecl* pd = s.model->find_property(end.cls, end.prop);
    auto attach = [&](const std::string& cls, int o, const std::string& prop, int target) {
        const PropertyDecl* d = s.model->find_property(cls, prop);
        Value cur = s.get(cls, o, prop);
        switch (d->kind) {
            case PropKind::Optional:
            case PropKind::One: s.put(cls, o, prop, Value::ref(target)); break;
            case PropKind::Set: {
                auto xs = cur.elems;
                xs.push_back(Value::ref(target));
                s.put(cls, o, prop, Value::set(std::move(xs)));
                break;
            }
            case PropKind::Seq: {
                auto xs = cur.elems;
                xs.push_back(Value::ref(target));
                s.put(cls, o, prop, Value::seq(std::move(xs)));
                break;
            }
        }
    };
    attach(end.cls, a, end.prop, b);
    attach(pd->opposite->cls, b, pd->opposite->prop, a);
}

struct Pieces {
    std::string model_text;
    std::string ctx_class = "A";
    std::function<void(ObjState&, IoMap&, Rng&)> setup; // state + io (this included)
    std::string template_name;
};

inline std::string wrap_model(const std::string& classes) {
    return "set Col { amber, blue, green, red }\n" + classes;
}

/// The template catalogue. Each entry produces a model with one operation
/// named `op` plus a consistent state and inputs; applicability preconditions
/// of the matrix cells (fresh/unlinked elements and so on) are established
/// here.
inline GeneratedCase build_case(uint64_t seed, const GenBounds& bounds);

namespace tpl {

using Builder = std::function<Pieces(Rng&, const GenBounds&)>;

inline Pieces scalar_overwrite(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "class-scalar-overwrite";
    std::string body;
    switch (rng.range(0, 2)) {
        case 0: body = "n := " + std::to_string(rng.range(0, 9)); break;
        case 1: body = "s := \"w" + std::to_string(rng.range(0, 9)) + "\""; break;
        default: body = "c := Col." + colour(rng);
    }
    p.model_text = wrap_model(
        "class A { attributes\n n : int\n s : str\n c : Col\n operations\n op { " + body +
        " }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        int pick = 1;
        for (int i = 0; i < objs; ++i) {
            int oid = add_obj(s, r, "A");
            s.put("A", oid, "c", Value::enum_v("Col", colour(r)));
            s.put("A", oid, "s", Value::string("w" + std::to_string(r.range(0, 9))));
            s.put("A", oid, "n", Value::integer(r.range(0, 9)));
            if (r.coin()) pick = oid;
        }
        io["this"] = Value::ref(pick);
    };
    return p;
}

inline Pieces scalar_clear(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "class-scalar-clear";
    p.model_text = wrap_model(
        "class A { attributes\n o : [int]\n n : int\n operations\n op { o := undefined }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) add_obj(s, r, "A");
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline Pieces output_assign(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "output-assign";
    p.model_text = wrap_model(
        "class A { attributes\n ds : set(Col) *\n operations\n op { out! := card(ds) + " +
        std::to_string(rng.range(0, 3)) + " }\n}\n");
    int elems = rng.range(0, b.max_elems);
    p.setup = [elems](ObjState& s, IoMap& io, Rng& r) {
        int oid = add_obj(s, r, "A");
        std::vector<Value> xs;
        for (int i = 0; i < elems; ++i) xs.push_back(Value::enum_v("Col", colour(r)));
        s.put("A", oid, "ds", Value::set(std::move(xs)));
        io["this"] = Value::ref(oid);
    };
    return p;
}

inline Pieces single_overwrite_single(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "single-overwrite-opp-single";
    p.model_text = wrap_model(
        "class A { attributes\n p : [B.q]\n operations\n"
        " op { b? : extent(B) ==> p := b? }\n}\n"
        "class B { attributes\n q : [A.p]\n}\n");
    int as = rng.range(1, b.max_objects), bs = rng.range(1, b.max_objects);
    bool prior = rng.coin();
    p.setup = [as, bs, prior](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < as; ++i) add_obj(s, r, "A");
        for (int i = 0; i < bs; ++i) add_obj(s, r, "B");
        int self = r.range(1, as);
        int fresh = bs + add_obj(s, r, "B") - bs; // always-unlinked input
        if (prior && bs >= 1) link(s, {"A", "p"}, self, r.range(1, bs));
        io["this"] = Value::ref(self);
        io["b?"] = Value::ref(fresh);
    };
    return p;
}

inline Pieces single_overwrite_seq(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "single-overwrite-opp-seq";
    p.model_text = wrap_model(
        "class A { attributes\n ao : [B.bs]\n operations\n"
        " op { b? : extent(B) ==> ao := b? }\n}\n"
        "class B { attributes\n bs : seq(A.ao) *\n}\n");
    int as = rng.range(2, b.max_objects + 1), bs = rng.range(1, b.max_objects);
    p.setup = [as, bs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < as; ++i) add_obj(s, r, "A");
        for (int i = 0; i < bs; ++i) add_obj(s, r, "B");
        int self = 1; // keep `this` unlinked; link some of the others
        for (int a = 2; a <= as; ++a)
            if (r.coin()) link(s, {"A", "ao"}, a, r.range(1, bs));
        io["this"] = Value::ref(self);
        io["b?"] = Value::ref(r.range(1, bs));
    };
    return p;
}

inline Pieces single_overwrite_set(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "single-overwrite-opp-set";
    p.model_text = wrap_model(
        "class A { attributes\n p : [B.qs]\n operations\n"
        " op { b? : extent(B) ==> p := b? }\n}\n"
        "class B { attributes\n qs : set(A.p) *\n}\n");
    int as = rng.range(2, b.max_objects + 1), bs = rng.range(1, b.max_objects);
    p.setup = [as, bs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < as; ++i) add_obj(s, r, "A");
        for (int i = 0; i < bs; ++i) add_obj(s, r, "B");
        for (int a = 2; a <= as; ++a)
            if (r.coin()) link(s, {"A", "p"}, a, r.range(1, bs));
        io["this"] = Value::ref(1);
        io["b?"] = Value::ref(r.range(1, bs));
    };
    return p;
}

inline Pieces pattern23(Rng& rng, const GenBounds& b) {
    Pieces p;
    bool paired = rng.coin();
    p.template_name = paired ? "seq-insert-opp-opt-paired" : "seq-insert-opp-opt";
    int len = rng.range(0, b.max_elems);
    int pos = rng.range(1, len + 1);
    std::string body = "bs := ins(bs, " + std::to_string(pos) + ", e?)";
    if (paired) body += " || e?.ao := this";
    p.model_text = wrap_model(
        "class R { attributes\n bs : seq(E.ao) *\n operations\n"
        " op { e? : extent(E) ==> " + body + " }\n}\n"
        "class E { attributes\n ao : [R.bs]\n}\n");
    p.ctx_class = "R";
    int others = rng.range(0, 1);
    p.setup = [len, others](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "R");
        for (int i = 0; i < len; ++i) link(s, {"R", "bs"}, self, add_obj(s, r, "E"));
        if (others) { // an unrelated owner whose rows must not shift
            int other = add_obj(s, r, "R");
            int extra = r.range(1, 2);
            for (int i = 0; i < extra; ++i) link(s, {"R", "bs"}, other, add_obj(s, r, "E"));
        }
        int fresh = add_obj(s, r, "E");
        io["this"] = Value::ref(self);
        io["e?"] = Value::ref(fresh);
    };
    return p;
}

inline Pieces pattern23_one_creation(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "seq-insert-opp-one-creation";
    int len = rng.range(0, b.max_elems);
    int pos = rng.range(1, len + 1);
    p.model_text = wrap_model(
        "class R { attributes\n bs : seq(E.ao) *\n operations\n"
        " op { e! : extent(E) ==> bs := ins(bs, " + std::to_string(pos) +
        ", e!) || e!.ao := this || e!.tag := " + std::to_string(rng.range(0, 9)) + " }\n}\n"
        "class E { attributes\n ao : R.bs\n tag : int\n}\n");
    p.ctx_class = "R";
    p.setup = [len](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "R");
        for (int i = 0; i < len; ++i) {
            int e = add_obj(s, r, "E");
            s.put("E", e, "tag", Value::integer(r.range(0, 9)));
            link(s, {"R", "bs"}, self, e);
        }
        io["this"] = Value::ref(self);
    };
    return p;
}

inline Pieces set_assoc_insert(Rng& rng, const GenBounds& b) {
    Pieces p;
    int opp = rng.range(0, 2); // optional / set / seq opposite
    p.template_name = opp == 0   ? "set-assoc-insert-opp-opt"
                      : opp == 1 ? "set-assoc-insert-opp-set"
                                 : "set-assoc-insert-opp-seq";
    std::string bq = opp == 0   ? "qs : [A.ps]"
                     : opp == 1 ? "qs : set(A.ps) *"
                                : "qs : seq(A.ps) *";
    p.model_text = wrap_model(
        "class A { attributes\n ps : set(B.qs) *\n operations\n"
        " op { b? : extent(B) ==> ps := ps \\/ { b? } }\n}\n"
        "class B { attributes\n " + bq + "\n}\n");
    int as = rng.range(1, b.max_objects), bs = rng.range(1, b.max_objects);
    p.setup = [as, bs, opp](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < as; ++i) add_obj(s, r, "A");
        for (int i = 0; i < bs; ++i) add_obj(s, r, "B");
        int self = 1;
        int pick = r.range(1, bs);
        if (opp != 0) {
            // collection opposites may carry prior links, to this or to others
            for (int a = 1; a <= as; ++a)
                for (int i = 1; i <= bs; ++i)
                    if (r.range(0, 3) == 0) link(s, {"A", "ps"}, a, i);
        } else if (r.coin()) {
            // already a member: the guarded insert must be a no-op
            link(s, {"A", "ps"}, self, pick);
        }
        io["this"] = Value::ref(self);
        io["b?"] = Value::ref(pick);
    };
    return p;
}

inline Pieces set_assoc_union(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "set-assoc-union";
    p.model_text = wrap_model(
        "class A { attributes\n ps : set(B.q) *\n operations\n"
        " op { ps := ps \\/ extent(B) }\n}\n"
        "class B { attributes\n q : [A.ps]\n}\n");
    int bs = rng.range(1, b.max_objects);
    p.setup = [bs](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "A");
        for (int i = 0; i < bs; ++i) {
            int o = add_obj(s, r, "B");
            if (r.coin()) link(s, {"A", "ps"}, self, o); // already linked to this is fine
        }
        io["this"] = Value::ref(self);
    };
    return p;
}

inline Pieces seq_concat_assoc(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "seq-concat-assoc";
    p.model_text = wrap_model(
        "class R { attributes\n bs : seq(E.ao) *\n operations\n"
        " op { bs := bs ^ extent(E) }\n}\n"
        "class E { attributes\n ao : [R.bs]\n}\n");
    p.ctx_class = "R";
    int es = rng.range(2, b.max_elems + 1);
    p.setup = [es](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "R");
        for (int i = 0; i < es; ++i) add_obj(s, r, "E"); // all unlinked
        io["this"] = Value::ref(self);
    };
    return p;
}

inline Pieces set_union_input(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "set-union-input";
    p.model_text = wrap_model(
        "class A { attributes\n ds : set(Col) *\n operations\n"
        " op { xs? : set(Col) ==> ds := ds \\/ xs? }\n}\n");
    int pre = rng.range(0, b.max_elems), ins = rng.range(1, (int)colours().size());
    p.setup = [pre, ins](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "A");
        std::vector<Value> xs;
        for (int i = 0; i < pre; ++i) xs.push_back(Value::enum_v("Col", colour(r)));
        s.put("A", self, "ds", Value::set(std::move(xs)));
        std::vector<Value> in;
        for (int i = 0; i < ins; ++i) in.push_back(Value::enum_v("Col", colour(r)));
        io["this"] = Value::ref(self);
        io["xs?"] = Value::set(std::move(in));
    };
    return p;
}

inline Pieces set_insert_display(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "set-insert-display";
    p.model_text = wrap_model(
        "class A { attributes\n ds : set(Col) *\n operations\n"
        " op { ds := ds \\/ { Col." + colour(rng) + ", Col." + colour(rng) + " } }\n}\n");
    int pre = rng.range(0, b.max_elems);
    p.setup = [pre](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "A");
        std::vector<Value> xs;
        for (int i = 0; i < pre; ++i) xs.push_back(Value::enum_v("Col", colour(r)));
        s.put("A", self, "ds", Value::set(std::move(xs)));
        io["this"] = Value::ref(self);
    };
    return p;
}

inline Pieces seq_insert_prim(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "seq-insert-prim";
    int len = rng.range(0, b.max_elems);
    int pos = rng.range(1, len + 1);
    p.model_text = wrap_model(
        "class A { attributes\n qs : seq(int) *\n operations\n"
        " op { qs := ins(qs, " + std::to_string(pos) + ", " +
        std::to_string(rng.range(0, 9)) + ") }\n}\n");
    p.setup = [len](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "A");
        std::vector<Value> xs;
        for (int i = 0; i < len; ++i) xs.push_back(Value::integer(r.range(0, 9)));
        s.put("A", self, "qs", Value::seq(std::move(xs)));
        if (r.coin()) { // unrelated owner rows must not shift
            int other = add_obj(s, r, "A");
            s.put("A", other, "qs", Value::seq({Value::integer(r.range(0, 9))}));
        }
        io["this"] = Value::ref(self);
    };
    return p;
}

inline Pieces seq_concat_input(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "seq-concat-input";
    p.model_text = wrap_model(
        "class A { attributes\n qs : seq(Col) *\n operations\n"
        " op { xs? : set(Col) ==> qs := qs ^ xs? }\n}\n");
    int len = rng.range(0, b.max_elems);
    p.setup = [len](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "A");
        std::vector<Value> xs;
        for (int i = 0; i < len; ++i) xs.push_back(Value::enum_v("Col", colour(r)));
        s.put("A", self, "qs", Value::seq(std::move(xs)));
        // at least two fresh members so a stale in-loop cache is observable
        std::vector<Value> in{Value::enum_v("Col", colours()[0]),
                              Value::enum_v("Col", colours()[1])};
        if (r.coin()) in.push_back(Value::enum_v("Col", colours()[2]));
        io["this"] = Value::ref(self);
        io["xs?"] = Value::set(std::move(in));
    };
    return p;
}

inline Pieces seq_indexed_overwrite(Rng& rng, const GenBounds& b) {
    Pieces p;
    bool assoc = rng.coin();
    p.template_name = assoc ? "seq-indexed-overwrite-assoc" : "seq-indexed-overwrite";
    int len = rng.range(1, std::max(1, b.max_elems));
    int pos = rng.range(1, len);
    if (!assoc) {
        p.model_text = wrap_model(
            "class A { attributes\n qs : seq(int) *\n operations\n"
            " op { qs(" + std::to_string(pos) + ") := " + std::to_string(rng.range(0, 9)) +
            " }\n}\n");
        p.setup = [len](ObjState& s, IoMap& io, Rng& r) {
            int self = add_obj(s, r, "A");
            std::vector<Value> xs;
            for (int i = 0; i < len; ++i) xs.push_back(Value::integer(r.range(0, 9)));
            s.put("A", self, "qs", Value::seq(std::move(xs)));
            io["this"] = Value::ref(self);
        };
        return p;
    }
    p.model_text = wrap_model(
        "class R { attributes\n bs : seq(E.ao) *\n operations\n"
        " op { e? : extent(E) ==> bs(" + std::to_string(pos) + ") := e? }\n}\n"
        "class E { attributes\n ao : [R.bs]\n}\n");
    p.ctx_class = "R";
    p.setup = [len](ObjState& s, IoMap& io, Rng& r) {
        int self = add_obj(s, r, "R");
        for (int i = 0; i < len; ++i) link(s, {"R", "bs"}, self, add_obj(s, r, "E"));
        int fresh = add_obj(s, r, "E");
        io["this"] = Value::ref(self);
        io["e?"] = Value::ref(fresh);
    };
    return p;
}

inline Pieces all_iterator(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "all-iterator";
    p.model_text = wrap_model(
        "class A { attributes\n flag : int\n operations\n"
        " op { ! v : extent(A) @ v.flag := " + std::to_string(rng.range(0, 9)) + " }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) {
            int o = add_obj(s, r, "A");
            s.put("A", o, "flag", Value::integer(r.range(0, 9)));
        }
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline Pieces any_iterator(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "any-iterator";
    p.model_text = wrap_model(
        "class A { attributes\n flag : int\n operations\n"
        " op { @ v : extent(A) @ v.flag := " + std::to_string(rng.range(0, 9)) + " }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) {
            int o = add_obj(s, r, "A");
            s.put("A", o, "flag", Value::integer(r.range(0, 9)));
        }
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline Pieces choice(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "choice";
    int g = rng.range(0, 9);
    p.model_text = wrap_model(
        "class A { attributes\n n : int\n operations\n"
        " op { (n < " + std::to_string(g) + " ==> n := " + std::to_string(rng.range(0, 9)) +
        ") [] (n >= " + std::to_string(g) + " ==> n := " + std::to_string(rng.range(0, 9)) +
        ") }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) add_obj(s, r, "A");
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline Pieces seq_composition(Rng& rng, const GenBounds& b) {
    Pieces p;
    p.template_name = "seq-composition";
    p.model_text = wrap_model(
        "class A { attributes\n n : int\n m2 : int\n operations\n"
        " op { n := " + std::to_string(rng.range(0, 9)) + " ; m2 := n + " +
        std::to_string(rng.range(0, 3)) + " }\n}\n");
    int objs = rng.range(1, b.max_objects);
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) add_obj(s, r, "A");
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline Pieces guard_blocked(Rng& rng, const GenBounds& b) {
    // a guard the current state violates: card(extent(A)) < k with k <= |A|
    Pieces p;
    p.template_name = "guard-blocked";
    std::string body;
    switch (rng.range(0, 2)) {
        case 0: body = "n := " + std::to_string(rng.range(0, 9)); break;
        case 1: body = "ds := ds \\/ { Col." + colour(rng) + " }"; break;
        default: body = "qs := ins(qs, 1, " + std::to_string(rng.range(0, 9)) + ")";
    }
    int objs = rng.range(1, b.max_objects);
    int k = rng.range(0, objs);
    p.model_text = wrap_model(
        "class A { attributes\n n : int\n ds : set(Col) *\n qs : seq(int) *\n operations\n"
        " op { card(extent(A)) < " + std::to_string(k) + " ==> " + body + " }\n}\n");
    p.setup = [objs](ObjState& s, IoMap& io, Rng& r) {
        for (int i = 0; i < objs; ++i) add_obj(s, r, "A");
        io["this"] = Value::ref(r.range(1, objs));
    };
    return p;
}

inline const std::vector<Builder>& catalogue() {
    static const std::vector<Builder> all{
        scalar_overwrite, scalar_clear, output_assign,
        single_overwrite_single, single_overwrite_seq, single_overwrite_set,
        pattern23, pattern23_one_creation,
        set_assoc_insert, set_assoc_union, seq_concat_assoc,
        set_union_input, set_insert_display,
        seq_insert_prim, seq_concat_input, seq_indexed_overwrite,
        all_iterator, any_iterator, choice, seq_composition,
        guard_blocked,
    };
    return all;
}

} // namespace tpl

inline GeneratedCase build_case(uint64_t seed, const GenBounds& bounds) {
    Rng rng(seed * 2654435761ULL + 1);
    const auto& cat = tpl::catalogue();
    size_t which = static_cast<size_t>(seed % cat.size());
    Pieces p = cat[which](rng, bounds);

    GeneratedCase c;
    BoosterModel m = parse_model({p.model_text, "generated"});
    auto diags = validate_model(m);
    if (!diags.empty())
        throw std::logic_error("generated model invalid: " + diags[0].message);
    c.model = std::make_shared<const BoosterModel>(std::move(m));
    c.cls = p.ctx_class;
    c.op = "op";
    c.template_name = p.template_name;
    c.expect_blocked = p.template_name == "guard-blocked";
    c.state = ObjState::empty(c.model);
    p.setup(c.state, c.io, rng);
    return c;
}

} // namespace gen

/// Reproducible pseudo-random case: small model, one operation from the
/// supported matrix, consistent state, well-typed inputs.
inline GeneratedCase generate_case(uint64_t seed, const GenBounds& bounds = {}) {
    return gen::build_case(seed, bounds);
}

// ---------------------------------------------------------------------------
// The differential suite

struct SuiteOptions {
    uint64_t seed0 = 0;
    int cases = 1000;
    CompileOptions compile;
    bool stop_on_failure = false;
    bool check_invariants = true;
};

struct SuiteResult {
    int simulated = 0;
    int violations = 0;
    int errors = 0;
    int invariant_failures = 0;
    std::map<std::string, int> cell_coverage;
    std::map<std::string, int> template_coverage;
    std::vector<std::pair<uint64_t, Verdict>> failures;

    bool ok() const { return violations == 0 && errors == 0 && invariant_failures == 0; }
};

inline SuiteResult run_simulation_suite(const SuiteOptions& opts) {
    SuiteResult res;
    for (int i = 0; i < opts.cases; ++i) {
        uint64_t seed = opts.seed0 + static_cast<uint64_t>(i);
        GeneratedCase c = generate_case(seed);
        res.template_coverage[c.template_name]++;

        if (opts.check_invariants) {
            if (!check_obj_invariants(c.state).empty()) {
                res.invariant_failures++;
                continue;
            }
        }

        CheckOutcome outcome =
            check_simulation(*c.model, c.cls, c.op, c.state, c.io, opts.compile);
        for (const auto& cell : outcome.cells) res.cell_coverage[cell]++;

        if (outcome.verdict.kind == Verdict::Kind::Simulated) {
            res.simulated++;
        } else {
            (outcome.verdict.kind == Verdict::Kind::Violation ? res.violations : res.errors)++;
            res.failures.emplace_back(seed, outcome.verdict);
            if (opts.stop_on_failure) return res;
        }

        if (opts.check_invariants) {
            try {
                ResolvedOp r = resolve_operation(*c.model, c.cls, c.op);
                for (const auto& [s2, io2] : eval_gsl(c.state, c.io, r.body))
                    if (!check_obj_invariants(s2).empty()) res.invariant_failures++;
            } catch (const std::exception&) {
                // evaluation errors are already counted through the verdict
            }
        }
    }
    return res;
}

} // namespace boosql
