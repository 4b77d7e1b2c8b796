#pragma once

// Table model derivation: one class table per class (scalar columns), one
// association table per bidirectional pair, one element table per set/seq of
// primitives. Also the reflective storage queries used by path translation
// and the DDL emitter.

#include <algorithm>
#include <string>
#include <vector>

#include "boosql/resolve.hpp"

namespace boosql {

inline std::string scalar_sql_type(const Base& b) {
    switch (b.kind) {
        case Base::Kind::Class: return "INTEGER";
        case Base::Kind::Int: return "INTEGER";
        case Base::Kind::Bool: return "INTEGER";
        case Base::Kind::Str: return "CHAR(30)";
        case Base::Kind::ValueSet: return "CHAR(30)";
    }
    return "INTEGER";
}

/// Type used when declaring a variable holding one value of this base;
/// value-set names print verbatim.
inline std::string declare_sql_type(const Base& b) {
    return b.kind == Base::Kind::ValueSet ? b.name : scalar_sql_type(b);
}

struct ColumnSpec {
    std::string name;
    std::string type;
    bool nullable = true;
    bool auto_increment = false;
    bool primary_key = false;
};

struct TableSpec {
    std::string name;
    std::vector<ColumnSpec> columns;
    std::vector<std::vector<std::string>> unique_sets;

    const ColumnSpec* find_column(const std::string& c) const {
        for (const auto& col : columns)
            if (col.name == c) return &col;
        return nullptr;
    }
    bool has_auto_increment() const {
        for (const auto& col : columns)
            if (col.auto_increment) return true;
        return false;
    }
};

/// One bidirectional association, canonically ordered end pair. Column `p`
/// holds values of property p (refs to the opposite class); a link between
/// a ∈ A and b ∈ B with b ∈ a.p is the row (p = b, q = a).
struct AssocTable {
    std::string name;
    IdenProperty end1, end2; // canonical order: end1 first in the name
    PropKind kind1 = PropKind::One, kind2 = PropKind::One;
    bool has_index = false; // one end is seq-kind

    const IdenProperty& seq_end() const { return kind1 == PropKind::Seq ? end1 : end2; }
    bool is_end(const IdenProperty& ip) const { return ip == end1 || ip == end2; }
    const IdenProperty& other_end(const IdenProperty& ip) const {
        return ip == end1 ? end2 : end1;
    }
    PropKind kind_of(const IdenProperty& ip) const { return ip == end1 ? kind1 : kind2; }
};

struct ElementTable {
    std::string name;       // {Class}_{prop}
    IdenProperty prop;
    bool ordered = false;   // seq-backed tables carry `index`
};

struct TableModel {
    std::string nTableModel;
    BoosterModel source;
    std::vector<std::pair<std::string, TableSpec>> class_tables; // class name -> spec
    std::vector<AssocTable> assoc_tables;
    std::vector<ElementTable> element_tables; // set and seq tables
    std::vector<std::pair<std::string, TableSpec>> all_specs;    // table name -> spec

    const TableSpec* find_spec(const std::string& t) const {
        for (const auto& [n, s] : all_specs)
            if (n == t) return &s;
        return nullptr;
    }
    const AssocTable* assoc_for(const IdenProperty& ip) const {
        for (const auto& a : assoc_tables)
            if (a.is_end(ip)) return &a;
        return nullptr;
    }
    const ElementTable* element_for(const IdenProperty& ip) const {
        for (const auto& e : element_tables)
            if (e.prop == ip) return &e;
        return nullptr;
    }
};

namespace detail {

inline std::pair<IdenProperty, IdenProperty> canonical_ends(const BoosterModel& m,
                                                            const IdenProperty& a,
                                                            const IdenProperty& b) {
    const PropertyDecl* pa = m.find_property(a.cls, a.prop);
    const PropertyDecl* pb = m.find_property(b.cls, b.prop);
    bool ca = is_collection(pa->kind), cb = is_collection(pb->kind);
    if (ca != cb) return ca ? std::make_pair(a, b) : std::make_pair(b, a);
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

} // namespace detail

inline std::string assoc_table_name(const IdenProperty& e1, const IdenProperty& e2) {
    return e1.cls + "_" + e1.prop + "_" + e2.cls + "_" + e2.prop;
}

/// Derive the relational schema from a validated model.
inline TableModel derive_table_model(const BoosterModel& m) {
    TableModel tm;
    tm.nTableModel = m.name;
    tm.source = m;

    auto oid_pk = [] {
        return ColumnSpec{"oid", "INTEGER", false, true, true};
    };

    for (const auto& c : m.classes) {
        TableSpec spec;
        spec.name = c.name;
        spec.columns.push_back(oid_pk());
        for (const auto& p : c.properties) {
            if (classify_property(m, {c.name, p.name}) != StorageKind::ClassColumn) continue;
            spec.columns.push_back(
                {p.name, scalar_sql_type(p.target), true, false, false});
        }
        tm.class_tables.emplace_back(c.name, spec);
        tm.all_specs.emplace_back(c.name, std::move(spec));
    }

    for (const auto& c : m.classes) {
        for (const auto& p : c.properties) {
            IdenProperty here{c.name, p.name};
            switch (classify_property(m, here)) {
                case StorageKind::BiAssoc: {
                    auto [e1, e2] = detail::canonical_ends(m, here, *p.opposite);
                    std::string name = assoc_table_name(e1, e2);
                    bool exists = false;
                    for (const auto& a : tm.assoc_tables) exists |= (a.name == name);
                    if (exists) break;
                    AssocTable at;
                    at.name = name;
                    at.end1 = e1;
                    at.end2 = e2;
                    at.kind1 = m.find_property(e1.cls, e1.prop)->kind;
                    at.kind2 = m.find_property(e2.cls, e2.prop)->kind;
                    at.has_index = at.kind1 == PropKind::Seq || at.kind2 == PropKind::Seq;

                    TableSpec spec;
                    spec.name = name;
                    spec.columns.push_back(oid_pk());
                    spec.columns.push_back({e1.prop, "INTEGER", true, false, false});
                    spec.columns.push_back({e2.prop, "INTEGER", true, false, false});
                    if (at.has_index)
                        spec.columns.push_back({"index", "INTEGER", true, false, false});
                    // Integrity constraints per end multiplicity. A single-valued
                    // end X.p means each X object joins at most one link row; the
                    // X side lives in the *other* end's column.
                    auto single = [](PropKind k) {
                        return k == PropKind::Optional || k == PropKind::One;
                    };
                    if (single(at.kind1)) spec.unique_sets.push_back({e2.prop});
                    if (single(at.kind2)) spec.unique_sets.push_back({e1.prop});
                    if (at.kind1 == PropKind::Seq)
                        spec.unique_sets.push_back({e2.prop, "index"});
                    if (at.kind2 == PropKind::Seq)
                        spec.unique_sets.push_back({e1.prop, "index"});
                    tm.assoc_tables.push_back(at);
                    tm.all_specs.emplace_back(name, std::move(spec));
                    break;
                }
                case StorageKind::SetTable:
                case StorageKind::SeqTable: {
                    ElementTable et;
                    et.name = c.name + "_" + p.name;
                    et.prop = here;
                    et.ordered = p.kind == PropKind::Seq;
                    TableSpec spec;
                    spec.name = et.name;
                    spec.columns.push_back({"oid", "INTEGER", false, false, false});
                    spec.columns.push_back(
                        {p.name, scalar_sql_type(p.target), true, false, false});
                    if (et.ordered)
                        spec.columns.push_back({"index", "INTEGER", false, false, false});
                    tm.element_tables.push_back(et);
                    tm.all_specs.emplace_back(et.name, std::move(spec));
                    break;
                }
                case StorageKind::ClassColumn:
                    break;
            }
        }
    }
    return tm;
}

// ---------------------------------------------------------------------------
// Reflective queries (the membership predicates used by path translation)

struct ReflectiveQueries {
    const TableModel* tm;
    bool biAssoc(const IdenProperty& ip) const {
        return classify_property(tm->source, ip) == StorageKind::BiAssoc;
    }
    bool classTables(const IdenProperty& ip) const {
        return classify_property(tm->source, ip) == StorageKind::ClassColumn;
    }
    bool setTables(const IdenProperty& ip) const {
        return classify_property(tm->source, ip) == StorageKind::SetTable;
    }
    bool seqTables(const IdenProperty& ip) const {
        return classify_property(tm->source, ip) == StorageKind::SeqTable;
    }
};

inline ReflectiveQueries reflective_queries(const TableModel& tm) { return {&tm}; }

// ---------------------------------------------------------------------------
// DDL emission

namespace detail {
inline std::string create_table_stmt(const TableSpec& s) {
    std::string out = "CREATE TABLE `" + s.name + "`(";
    bool first = true;
    for (const auto& c : s.columns) {
        if (!first) out += ", ";
        first = false;
        out += "`" + c.name + "` " + c.type;
        if (c.auto_increment) out += " AUTO_INCREMENT";
        if (c.primary_key) out += ", PRIMARY KEY (`" + c.name + "`)";
    }
    out += ");";
    return out;
}
} // namespace detail

/// Deterministic order: class tables alphabetically, then association, set and
/// seq tables alphabetically, then the association integrity constraints.
inline std::vector<std::string> emit_ddl(const TableModel& tm) {
    std::vector<std::string> out;
    auto sorted_names = [](auto begin, auto end, auto name_of) {
        std::vector<std::string> ns;
        for (auto it = begin; it != end; ++it) ns.push_back(name_of(*it));
        std::sort(ns.begin(), ns.end());
        return ns;
    };

    std::vector<std::string> class_names = sorted_names(
        tm.class_tables.begin(), tm.class_tables.end(), [](const auto& p) { return p.first; });
    std::vector<std::string> assoc_names = sorted_names(
        tm.assoc_tables.begin(), tm.assoc_tables.end(), [](const auto& a) { return a.name; });
    std::vector<std::string> set_names, seq_names;
    for (const auto& e : tm.element_tables)
        (e.ordered ? seq_names : set_names).push_back(e.name);
    std::sort(set_names.begin(), set_names.end());
    std::sort(seq_names.begin(), seq_names.end());

    auto emit_group = [&](const std::vector<std::string>& names) {
        for (const auto& n : names) out.push_back(detail::create_table_stmt(*tm.find_spec(n)));
    };
    emit_group(class_names);
    emit_group(assoc_names);
    emit_group(set_names);
    emit_group(seq_names);

    for (const auto& n : assoc_names) {
        const TableSpec* s = tm.find_spec(n);
        for (const auto& us : s->unique_sets) {
            std::string stmt = "ALTER TABLE `" + n + "` ADD UNIQUE (";
            for (size_t i = 0; i < us.size(); ++i) {
                if (i) stmt += ", ";
                stmt += "`" + us[i] + "`";
            }
            stmt += ");";
            out.push_back(stmt);
        }
    }
    return out;
}

} // namespace boosql
