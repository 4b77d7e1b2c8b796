#pragma once

// Static object-model vocabulary: classes, properties, multiplicities and
// bidirectional association pairing. Shared by every pipeline stage.

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boosql/diag.hpp"

namespace boosql {

struct Substitution;
using SubPtr = std::shared_ptr<const Substitution>;

/// Multiplicity kinds of a property: optional (0..1), one, set (*), seq (ordered *).
enum class PropKind { Optional, One, Set, Seq };

inline bool is_collection(PropKind k) { return k == PropKind::Set || k == PropKind::Seq; }

inline const char* prop_kind_name(PropKind k) {
    switch (k) {
        case PropKind::Optional: return "optional";
        case PropKind::One: return "one";
        case PropKind::Set: return "set";
        case PropKind::Seq: return "seq";
    }
    return "?";
}

/// Base type of a reference or property target.
struct Base {
    enum class Kind { Class, ValueSet, Int, Str, Bool } kind = Kind::Int;
    std::string name; // class or value-set name, empty otherwise

    static Base cls(std::string n) { return {Kind::Class, std::move(n)}; }
    static Base value_set(std::string n) { return {Kind::ValueSet, std::move(n)}; }
    static Base integer() { return {Kind::Int, {}}; }
    static Base str() { return {Kind::Str, {}}; }
    static Base boolean() { return {Kind::Bool, {}}; }

    bool is_class() const { return kind == Kind::Class; }
    friend bool operator==(const Base&, const Base&) = default;
};

inline std::string base_str(const Base& b) {
    switch (b.kind) {
        case Base::Kind::Class: return b.name;
        case Base::Kind::ValueSet: return b.name;
        case Base::Kind::Int: return "int";
        case Base::Kind::Str: return "str";
        case Base::Kind::Bool: return "bool";
    }
    return "?";
}

/// A property contextualised with its enclosing class.
struct IdenProperty {
    std::string cls;
    std::string prop;
    friend bool operator==(const IdenProperty&, const IdenProperty&) = default;
    friend auto operator<=>(const IdenProperty&, const IdenProperty&) = default;
};

struct PropertyDecl {
    std::string name;
    PropKind kind = PropKind::One;
    Base target;
    std::optional<IdenProperty> opposite; // present iff bidirectional association end
};

struct ValueSetDecl {
    std::string name;
    std::vector<std::string> members;
};

struct OperationDecl {
    std::string name;
    SubPtr body;
};

struct ClassDecl {
    std::string name;
    std::vector<PropertyDecl> properties;   // declaration order is significant
    std::vector<OperationDecl> operations;

    const PropertyDecl* find_property(const std::string& p) const {
        for (const auto& d : properties)
            if (d.name == p) return &d;
        return nullptr;
    }
    const OperationDecl* find_operation(const std::string& o) const {
        for (const auto& d : operations)
            if (d.name == o) return &d;
        return nullptr;
    }
};

struct BoosterModel {
    std::string name = "model";
    std::vector<ClassDecl> classes;
    std::vector<ValueSetDecl> value_sets;

    const ClassDecl* find_class(const std::string& c) const {
        for (const auto& d : classes)
            if (d.name == c) return &d;
        return nullptr;
    }
    const ValueSetDecl* find_value_set(const std::string& s) const {
        for (const auto& d : value_sets)
            if (d.name == s) return &d;
        return nullptr;
    }
    const PropertyDecl* find_property(const std::string& c, const std::string& p) const {
        const ClassDecl* cd = find_class(c);
        return cd ? cd->find_property(p) : nullptr;
    }
};

namespace detail {
inline void check_property(const BoosterModel& m, const ClassDecl& c, const PropertyDecl& p,
                           std::vector<Diagnostic>& out) {
    auto bad = [&](std::string msg) {
        out.push_back({Diagnostic::Severity::Error, c.name + "." + p.name, std::move(msg)});
    };
    if (p.target.kind == Base::Kind::Class && !m.find_class(p.target.name))
        bad("target class '" + p.target.name + "' is not declared");
    if (p.target.kind == Base::Kind::ValueSet && !m.find_value_set(p.target.name))
        bad("target value set '" + p.target.name + "' is not declared");
    if (p.opposite) {
        if (p.target.kind != Base::Kind::Class) {
            bad("association end must be class-valued");
            return;
        }
        const PropertyDecl* q = m.find_property(p.opposite->cls, p.opposite->prop);
        if (!q) {
            bad("opposite end " + p.opposite->cls + "." + p.opposite->prop + " does not exist");
            return;
        }
        if (p.opposite->cls != p.target.name)
            bad("opposite end lives in '" + p.opposite->cls + "' but the target class is '" +
                p.target.name + "'");
        if (!q->opposite || q->opposite->cls != c.name || q->opposite->prop != p.name)
            bad("opposition is not symmetric with " + p.opposite->cls + "." + p.opposite->prop);
        else {
            if (q->target != Base::cls(c.name))
                bad("opposite end does not target class '" + c.name + "'");
            if (p.kind == PropKind::Seq && q->kind == PropKind::Seq)
                bad("seq-seq bidirectional associations are not supported (a single index "
                    "column cannot order both ends)");
        }
    }
}
} // namespace detail

/// Check every model invariant; an empty result means the model is well-formed.
/// Pure: same input, same diagnostics.
inline std::vector<Diagnostic> validate_model(const BoosterModel& m) {
    std::vector<Diagnostic> out;
    for (const auto& vs : m.value_sets) {
        for (size_t i = 0; i < vs.members.size(); ++i)
            for (size_t j = i + 1; j < vs.members.size(); ++j)
                if (vs.members[i] == vs.members[j])
                    out.push_back({Diagnostic::Severity::Error, vs.name,
                                   "duplicate member '" + vs.members[i] + "'"});
    }
    for (size_t i = 0; i < m.classes.size(); ++i)
        for (size_t j = i + 1; j < m.classes.size(); ++j)
            if (m.classes[i].name == m.classes[j].name)
                out.push_back({Diagnostic::Severity::Error, m.classes[i].name,
                               "duplicate class declaration"});
    for (const auto& c : m.classes) {
        for (size_t i = 0; i < c.properties.size(); ++i)
            for (size_t j = i + 1; j < c.properties.size(); ++j)
                if (c.properties[i].name == c.properties[j].name)
                    out.push_back({Diagnostic::Severity::Error,
                                   c.name + "." + c.properties[i].name,
                                   "duplicate property declaration"});
        for (const auto& p : c.properties) detail::check_property(m, c, p, out);
    }
    return out;
}

} // namespace boosql
