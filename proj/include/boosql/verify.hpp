#pragma once

// Differential checker: the linking invariant between object states and
// database states, the value mappings, the simulation check, and seeded
// random case generation over the supported assignment matrix.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "boosql/compile.hpp"
#include "boosql/eval_gsl.hpp"
#include "boosql/eval_sql.hpp"
#include "boosql/parse.hpp"

namespace boosql {

// ---------------------------------------------------------------------------
// Value encoding. Object ids are integers on both sides and the fixture
// encoder keeps the auto-increment counters aligned with allocation counters,
// so the default witness is the identity; an explicit injection can be
// supplied for independently built states.

struct LinkWitness {
    std::map<std::pair<std::string, int>, long long> oid_map; // usually empty

    ScalarValue oid(const std::string& cls, int o) const {
        auto it = oid_map.find({cls, o});
        return ScalarValue::integer(it == oid_map.end() ? o : it->second);
    }
};

inline ScalarValue encode_scalar(const LinkWitness& w, const Base& target, const Value& v) {
    switch (v.kind) {
        case Value::Kind::Undefined: return ScalarValue::null();
        case Value::Kind::Int: return ScalarValue::integer(v.num);
        case Value::Kind::Str: return ScalarValue::string(v.text);
        case Value::Kind::Bool: return ScalarValue::integer(v.num); // stored as 0/1
        case Value::Kind::Enum: return ScalarValue::string(v.enum_member.member);
        case Value::Kind::Ref:
            return w.oid(target.kind == Base::Kind::Class ? target.name : "",
                         static_cast<int>(v.num));
        default:
            throw EvalError(EvalError::Kind::TypeMismatch,
                            "collection value has no scalar encoding");
    }
}

// ---------------------------------------------------------------------------
// Mapping functions (reference-value pairs per property kind)

using MappingPair = std::pair<ScalarValue, ScalarValue>;
struct MappingPairLess {
    bool operator()(const MappingPair& a, const MappingPair& b) const {
        if (int c = scalar_cmp(a.first, b.first)) return c < 0;
        return scalar_cmp(a.second, b.second) < 0;
    }
};
using MappingSet = std::set<MappingPair, MappingPairLess>;

struct IndexedPair {
    ScalarValue owner, value;
    long long index;
    friend bool operator==(const IndexedPair& a, const IndexedPair& b) {
        return scalar_cmp(a.owner, b.owner) == 0 && scalar_cmp(a.value, b.value) == 0 &&
               a.index == b.index;
    }
};
struct IndexedPairLess {
    bool operator()(const IndexedPair& a, const IndexedPair& b) const {
        if (int c = scalar_cmp(a.owner, b.owner)) return c < 0;
        if (a.index != b.index) return a.index < b.index;
        return scalar_cmp(a.value, b.value) < 0;
    }
};
using IndexedSet = std::set<IndexedPair, IndexedPairLess>;

/// Object-side reference-value pairs of one property; undefined values
/// contribute no pair.
inline MappingSet property_mappings(const ObjState& s, const IdenProperty& p,
                                    const LinkWitness& w = {}) {
    MappingSet out;
    const PropertyDecl* pd = s.model->find_property(p.cls, p.prop);
    if (!pd) throw ResolveError("unknown property " + p.cls + "." + p.prop);
    auto ext = s.extent.find(p.cls);
    if (ext == s.extent.end()) return out;
    for (int oid : ext->second) {
        const Value& v = s.get(p.cls, oid, p.prop);
        ScalarValue owner = w.oid(p.cls, oid);
        if (v.is_collection()) {
            for (const auto& e : v.elems) out.insert({owner, encode_scalar(w, pd->target, e)});
        } else if (v.is_defined()) {
            out.insert({owner, encode_scalar(w, pd->target, v)});
        }
    }
    return out;
}

/// Same, with 1-based positions, for sequence-kind properties.
inline IndexedSet property_mappings_indexed(const ObjState& s, const IdenProperty& p,
                                            const LinkWitness& w = {}) {
    IndexedSet out;
    const PropertyDecl* pd = s.model->find_property(p.cls, p.prop);
    auto ext = s.extent.find(p.cls);
    if (ext == s.extent.end()) return out;
    for (int oid : ext->second) {
        const Value& v = s.get(p.cls, oid, p.prop);
        if (v.kind != Value::Kind::SeqV) continue;
        for (size_t i = 0; i < v.elems.size(); ++i)
            out.insert({w.oid(p.cls, oid), encode_scalar(w, pd->target, v.elems[i]),
                        static_cast<long long>(i + 1)});
    }
    return out;
}

/// Table-side projection relation over two columns.
inline MappingSet table_mappings(const DbState& db, const std::string& table,
                                 const std::string& c1, const std::string& c2) {
    MappingSet out;
    const SqlTable* t = db.find_table(table);
    if (!t) throw SqlError(SqlError::Kind::MissingTable, "no table `" + table + "`");
    for (const auto& row : t->rows) {
        auto a = row.values.find(c1);
        auto b = row.values.find(c2);
        if (a == row.values.end() || b == row.values.end())
            throw SqlError(SqlError::Kind::MissingColumn, "missing column in " + table);
        if (a->second.is_null() || b->second.is_null()) continue;
        out.insert({a->second, b->second});
    }
    return out;
}

inline IndexedSet table_mappings_indexed(const DbState& db, const std::string& table,
                                         const std::string& owner_col,
                                         const std::string& value_col) {
    IndexedSet out;
    const SqlTable* t = db.find_table(table);
    if (!t) throw SqlError(SqlError::Kind::MissingTable, "no table `" + table + "`");
    for (const auto& row : t->rows) {
        const ScalarValue& o = row.values.at(owner_col);
        const ScalarValue& v = row.values.at(value_col);
        const ScalarValue& i = row.values.at("index");
        if (o.is_null() || v.is_null()) continue;
        out.insert({o, v, i.kind == ScalarValue::Kind::Int ? i.num : -1});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixture encoding: ObjState -> DbState under the identity witness

inline DbState encode_db_state(const ObjState& s, const TableModel& tm,
                               const LinkWitness& w = {}) {
    DbState db = DbState::from_schema(tm);
    const BoosterModel& m = *s.model;

    for (const auto& c : m.classes) {
        SqlTable& t = db.tables.at(c.name);
        auto ext = s.extent.find(c.name);
        if (ext == s.extent.end()) continue;
        for (int oid : ext->second) {
            Tuple row;
            for (const auto& col : t.spec.columns) row.values[col.name] = ScalarValue::null();
            row.values["oid"] = w.oid(c.name, oid);
            for (const auto& p : c.properties) {
                if (classify_property(m, {c.name, p.name}) != StorageKind::ClassColumn)
                    continue;
                row.values[p.name] = encode_scalar(w, p.target, s.get(c.name, oid, p.name));
            }
            t.rows.push_back(std::move(row));
            t.auto_increment = std::max(t.auto_increment, static_cast<long long>(oid));
        }
        t.canonicalise();
    }

    for (const auto& at : tm.assoc_tables) {
        SqlTable& t = db.tables.at(at.name);
        const PropertyDecl* p1 = m.find_property(at.end1.cls, at.end1.prop);
        auto ext = s.extent.find(at.end1.cls);
        if (ext == s.extent.end()) continue;
        for (int a : ext->second) {
            const Value& v = s.get(at.end1.cls, a, at.end1.prop);
            std::vector<Value> elems =
                v.is_collection() ? v.elems
                                  : (v.is_defined() ? std::vector<Value>{v}
                                                    : std::vector<Value>{});
            for (size_t i = 0; i < elems.size(); ++i) {
                int b = static_cast<int>(elems[i].num);
                Tuple row;
                row.values["oid"] = ScalarValue::integer(++t.auto_increment);
                row.values[at.end1.prop] = w.oid(p1->target.name, b);
                row.values[at.end2.prop] = w.oid(at.end1.cls, a);
                if (at.has_index) {
                    long long idx;
                    if (at.kind1 == PropKind::Seq) {
                        idx = static_cast<long long>(i + 1);
                    } else {
                        // position of a within b's sequence
                        const Value& back = s.get(at.end2.cls, b, at.end2.prop);
                        idx = 0;
                        for (size_t j = 0; j < back.elems.size(); ++j)
                            if (back.elems[j] == Value::ref(a))
                                idx = static_cast<long long>(j + 1);
                    }
                    row.values["index"] = ScalarValue::integer(idx);
                }
                t.rows.push_back(std::move(row));
            }
        }
        t.canonicalise();
    }

    for (const auto& et : tm.element_tables) {
        SqlTable& t = db.tables.at(et.name);
        const PropertyDecl* pd = m.find_property(et.prop.cls, et.prop.prop);
        auto ext = s.extent.find(et.prop.cls);
        if (ext == s.extent.end()) continue;
        for (int oid : ext->second) {
            const Value& v = s.get(et.prop.cls, oid, et.prop.prop);
            for (size_t i = 0; i < v.elems.size(); ++i) {
                Tuple row;
                row.values["oid"] = w.oid(et.prop.cls, oid);
                row.values[et.prop.prop] = encode_scalar(w, pd->target, v.elems[i]);
                if (et.ordered) row.values["index"] = ScalarValue::integer((long long)i + 1);
                t.rows.push_back(std::move(row));
            }
        }
        t.canonicalise();
    }
    return db;
}

// ---------------------------------------------------------------------------
// The linking invariant

struct LinkReport {
    bool ok = true;
    bool schema_ok = true;
    std::string conjunct; // first failing conjunct
    std::string detail;
};

namespace verify_detail {

inline std::string many(PropKind k) {
    return is_collection(k) ? "many" : prop_kind_name(k);
}

inline bool mapping_eq(const MappingSet& a, const MappingSet& b) { return a == b; }

} // namespace verify_detail

/// The conjunction linking an object state to a database state: extents match
/// class-table keys; every stored property role has equal reference-value
/// pairs on both sides; sequence roles also agree on positions. Association
/// conjuncts are grouped by the unordered multiplicity combination
/// ({opt,one,many} x {opt,one,many}) of their ends.
inline LinkReport linking_invariant(const ObjState& s, const DbState& db,
                                    const LinkWitness& w = {}) {
    LinkReport rep;
    TableModel tm = derive_table_model(*s.model);

    // schema agreement (distinguished from invariant failure)
    for (const auto& [name, spec] : tm.all_specs) {
        const SqlTable* t = db.find_table(name);
        if (!t || t->spec.columns.size() != spec.columns.size()) {
            rep.ok = false;
            rep.schema_ok = false;
            rep.conjunct = "schema";
            rep.detail = "table `" + name + "` missing or malformed";
            return rep;
        }
    }

    auto fail = [&](std::string conjunct, std::string detail) {
        rep.ok = false;
        rep.conjunct = std::move(conjunct);
        rep.detail = std::move(detail);
    };

    // extents vs class-table oid sets
    for (const auto& c : s.model->classes) {
        std::set<long long> left, right;
        auto ext = s.extent.find(c.name);
        if (ext != s.extent.end())
            for (int oid : ext->second) left.insert(w.oid(c.name, oid).num);
        for (const auto& row : db.find_table(c.name)->rows)
            right.insert(row.values.at("oid").num);
        if (left != right) {
            fail("extent", "class " + c.name);
            return rep;
        }
    }

    // class-table scalar columns
    for (const auto& c : s.model->classes) {
        for (const auto& p : c.properties) {
            if (classify_property(*s.model, {c.name, p.name}) != StorageKind::ClassColumn)
                continue;
            MappingSet left = property_mappings(s, {c.name, p.name}, w);
            MappingSet right = table_mappings(db, c.name, "oid", p.name);
            if (!verify_detail::mapping_eq(left, right)) {
                fail("scalar", c.name + "." + p.name);
                return rep;
            }
        }
    }

    // primitive element tables
    for (const auto& et : tm.element_tables) {
        MappingSet left = property_mappings(s, et.prop, w);
        MappingSet right = table_mappings(db, et.name, "oid", et.prop.prop);
        if (!verify_detail::mapping_eq(left, right)) {
            fail(et.ordered ? "seq" : "set", et.name);
            return rep;
        }
        if (et.ordered) {
            IndexedSet li = property_mappings_indexed(s, et.prop, w);
            IndexedSet ri = table_mappings_indexed(db, et.name, "oid", et.prop.prop);
            if (!(li == ri)) {
                fail("seq", et.name + " (positions)");
                return rep;
            }
        }
    }

    // association tables, one conjunct per unordered multiplicity combination
    for (const auto& at : tm.assoc_tables) {
        std::string combo = "assoc-" + verify_detail::many(at.kind1) + "-" +
                            verify_detail::many(at.kind2);
        // pairs (owner = end1 object, value = linked end2-side object)
        MappingSet left;
        {
            MappingSet raw = property_mappings(s, at.end1, w);
            for (const auto& [o, v] : raw) left.insert({o, v});
        }
        MappingSet right;
        {
            MappingSet raw = table_mappings(db, at.name, at.end2.prop, at.end1.prop);
            for (const auto& [o, v] : raw) right.insert({o, v});
        }
        if (!verify_detail::mapping_eq(left, right)) {
            fail(combo, at.name);
            return rep;
        }
        if (at.has_index) {
            const IdenProperty& seq_end = at.seq_end();
            const IdenProperty& other = at.other_end(seq_end);
            IndexedSet li = property_mappings_indexed(s, seq_end, w);
            IndexedSet ri = table_mappings_indexed(db, at.name, other.prop, seq_end.prop);
            if (!(li == ri)) {
                fail("seq", at.name + " (positions)");
                return rep;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Simulation check

struct Verdict {
    enum class Kind { Simulated, Violation, Error } kind = Kind::Simulated;
    std::string detail;  // failing conjunct or error message
    std::string stage;   // for errors: compile / sql-runtime / gsl / precondition
    ObjState witness_state;
    IoMap witness_io;
    std::string report;  // replayable bundle for violations
};

struct CheckOutcome {
    Verdict verdict;
    std::set<std::string> cells;
};

namespace verify_detail {

inline void split_sql_inputs(const TypingEnv& env, const IoMap& io,
                             std::map<std::string, ScalarValue>& scalars,
                             std::map<std::string, TableInput>& tables) {
    for (const auto& [name, v] : io) {
        if (name == "this") {
            scalars["this?"] = ScalarValue::integer(v.num);
            continue;
        }
        if (v.is_collection()) {
            TableInput ti;
            const Base* base = nullptr;
            if (auto it = env.io.find(name); it != env.io.end()) base = &it->second.base;
            for (const auto& e : v.elems)
                ti.values.push_back(encode_scalar({}, base ? *base : Base::integer(), e));
            tables[name] = std::move(ti);
        } else {
            scalars[name] = encode_scalar({}, Base::integer(), v);
        }
    }
}

} // namespace verify_detail

/// Runs the generated procedure and the relational semantics from the same
/// linked before-states and decides whether some semantic after-state matches
/// the database after-state modulo the linking invariant, with agreeing
/// outputs.
inline CheckOutcome check_simulation(const BoosterModel& m, const std::string& cls,
                                     const std::string& op, const ObjState& s, const IoMap& io,
                                     CompileOptions options = {}) {
    CheckOutcome out;
    Verdict& v = out.verdict;

    TableModel tm = derive_table_model(m);
    DbState db = encode_db_state(s, tm);
    {
        LinkReport pre = linking_invariant(s, db);
        if (!pre.ok) {
            v.kind = Verdict::Kind::Error;
            v.stage = "precondition";
            v.detail = "before-states not linked: " + pre.conjunct + " " + pre.detail;
            return out;
        }
    }

    GenResult gen;
    ResolvedOp resolved;
    try {
        resolved = resolve_operation(m, cls, op);
        gen = gen_procedure(m, tm, cls, op, options);
        out.cells = gen.cells;
    } catch (const std::exception& e) {
        v.kind = Verdict::Kind::Error;
        v.stage = "compile";
        v.detail = e.what();
        return out;
    }

    DbState db_after;
    SqlIo sql_out;
    try {
        std::map<std::string, ScalarValue> scalars;
        std::map<std::string, TableInput> tables;
        verify_detail::split_sql_inputs(resolved.env, io, scalars, tables);
        auto r = eval_sql_proc(db, scalars, tables, gen.proc);
        db_after = std::move(r.first);
        sql_out = std::move(r.second);
    } catch (const std::exception& e) {
        v.kind = Verdict::Kind::Error;
        v.stage = "sql-runtime";
        v.detail = e.what();
        return out;
    }

    std::vector<std::pair<ObjState, IoMap>> candidates;
    try {
        candidates = eval_gsl(s, io, resolved.body);
    } catch (const std::exception& e) {
        v.kind = Verdict::Kind::Error;
        v.stage = "gsl";
        v.detail = e.what();
        return out;
    }

    std::string first_conjunct;
    std::string first_detail;
    for (const auto& [s2, io2] : candidates) {
        LinkReport rep = linking_invariant(s2, db_after);
        bool outputs_ok = true;
        for (const auto& [name, type] : gen.proc.out_params) {
            ScalarValue sql_v = sql_out.vars.count(name) ? sql_out.vars.at(name)
                                                         : ScalarValue::null();
            ScalarValue gsl_v = ScalarValue::null();
            if (auto it = io2.find(name); it != io2.end() && it->second.is_defined())
                gsl_v = encode_scalar({}, Base::integer(), it->second);
            if (!(sql_v == gsl_v)) outputs_ok = false;
        }
        if (rep.ok && outputs_ok) {
            v.kind = Verdict::Kind::Simulated;
            v.witness_state = s2;
            v.witness_io = io2;
            return out;
        }
        if (first_conjunct.empty()) {
            first_conjunct = rep.ok ? "outputs" : rep.conjunct;
            first_detail = rep.ok ? "output values disagree" : rep.detail;
        }
    }

    v.kind = Verdict::Kind::Violation;
    v.detail = candidates.empty()
                   ? "the semantics admits no transition (infeasible program)"
                   : "no semantic after-state matches; first failing conjunct: " +
                         first_conjunct + " (" + first_detail + ")";
    {
        std::ostringstream rep;
        rep << "== model ==\n" << print_model(m);
        rep << "== operation ==\n" << cls << "." << op << "\n";
        rep << "== before state ==\n" << serialize_obj_state(s);
        rep << "== io ==\n" << serialize_io(io);
        rep << "== generated sql ==\n" << sql::emit_sql_text(gen.proc);
        rep << "== sql after state ==\n" << serialize_db_state(db_after);
        rep << "== candidates (" << candidates.size() << ") ==\n";
        for (const auto& [s2, io2] : candidates) {
            LinkReport r2 = linking_invariant(s2, db_after);
            rep << "-- candidate (failing: " << (r2.ok ? "outputs" : r2.conjunct) << ")\n"
                << serialize_obj_state(s2);
        }
        v.report = rep.str();
    }
    return out;
}

} // namespace boosql
