#pragma once

// The target SQL subset: exactly the statements and expression forms the
// generator produces and the interpreter executes, plus the text emitter.
// Identifiers are backquoted, string literals single-quoted, statements
// semicolon-terminated.

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "boosql/diag.hpp"

namespace boosql::sql {

struct SqlExpr;
using SqlExprPtr = std::shared_ptr<const SqlExpr>;

enum class SqlBinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class SqlUnOp { Not, Neg };

/// Column or variable reference; resolution is contextual (row columns first,
/// then the variable environment), as in SQL itself.
struct Name { std::string name; };
struct IntL { long long value = 0; };
struct StrL { std::string value; };
struct BoolL { bool value = true; };
struct NullL {};
struct LastInsertId {};
struct Unary { SqlUnOp op; SqlExprPtr arg; };
struct Binary { SqlBinOp op; SqlExprPtr lhs, rhs; };

struct Projection {
    enum class Kind { Col, CountCol, CountStar, Star } kind = Kind::Col;
    std::string col;
};

struct SelectExpr;

struct FromClause {
    enum class Kind { Table, Sub } kind = Kind::Table;
    std::string table;                  // Table
    std::shared_ptr<const SelectExpr> sub; // Sub
    std::string alias;                  // Sub
};

struct SelectExpr {
    Projection proj;
    FromClause from;
    SqlExprPtr where; // never null; TRUE when unrestricted
};

struct SqlExpr {
    std::variant<Name, IntL, StrL, BoolL, NullL, LastInsertId, Unary, Binary, SelectExpr> v;
};

template <class T, class... Args>
SqlExprPtr mk(Args&&... args) {
    return std::make_shared<const SqlExpr>(SqlExpr{T{std::forward<Args>(args)...}});
}

inline SqlExprPtr name(std::string n) { return mk<Name>(std::move(n)); }
inline SqlExprPtr lit(long long v) { return mk<IntL>(v); }
inline SqlExprPtr str(std::string s) { return mk<StrL>(std::move(s)); }
inline SqlExprPtr truth(bool b = true) { return mk<BoolL>(b); }
inline SqlExprPtr null() { return mk<NullL>(); }
inline SqlExprPtr bin(SqlBinOp op, SqlExprPtr l, SqlExprPtr r) {
    return mk<Binary>(op, std::move(l), std::move(r));
}

// ---------------------------------------------------------------------------
// Statements

struct SqlStatement;
using Stmts = std::vector<SqlStatement>;

struct Update {
    std::string table;
    std::vector<std::pair<std::string, SqlExprPtr>> sets;
    SqlExprPtr where;
};
struct Insert {
    std::string table;
    std::vector<std::string> columns;
    std::vector<SqlExprPtr> values;
};
struct SelectInto {
    Projection proj;
    std::string var;
    FromClause from;
    SqlExprPtr where;
};
struct CreateTempTableAs { std::string name; SelectExpr select; };
struct DropTempTable { std::string name; };
struct DeclareVar { std::string name; std::string type; };
struct DeclareCursor { std::string name; SelectExpr select; };
struct OpenCursor { std::string name; };
struct FetchInto { std::string cursor; std::string var; };
struct CloseCursor { std::string name; };
struct SetVar { std::string name; SqlExprPtr value; };
struct IfThenElse;
struct While;
struct Signal { std::string message; };

struct SqlStatement {
    std::variant<Update, Insert, SelectInto, CreateTempTableAs, DropTempTable, DeclareVar,
                 DeclareCursor, OpenCursor, FetchInto, CloseCursor, SetVar,
                 std::shared_ptr<const IfThenElse>, std::shared_ptr<const While>, Signal>
        v;
};

struct IfThenElse {
    SqlExprPtr cond;
    Stmts then_branch;
    Stmts else_branch;
};
struct While {
    SqlExprPtr cond;
    Stmts body; // nonempty for generated loops
};

inline SqlStatement if_stmt(SqlExprPtr cond, Stmts then_b, Stmts else_b = {}) {
    return {std::make_shared<const IfThenElse>(
        IfThenElse{std::move(cond), std::move(then_b), std::move(else_b)})};
}
inline SqlStatement while_stmt(SqlExprPtr cond, Stmts body) {
    return {std::make_shared<const While>(While{std::move(cond), std::move(body)})};
}

struct SqlProcedure {
    std::string name;
    std::vector<std::pair<std::string, std::string>> in_params;  // `this?` always first
    std::vector<std::pair<std::string, std::string>> out_params;
    Stmts body;
};

// ---------------------------------------------------------------------------
// Structural equality

bool equal(const SqlExpr& a, const SqlExpr& b);
inline bool equal(const SqlExprPtr& a, const SqlExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}
inline bool equal(const Projection& a, const Projection& b) {
    return a.kind == b.kind && a.col == b.col;
}
bool equal(const SelectExpr& a, const SelectExpr& b);
inline bool equal(const FromClause& a, const FromClause& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == FromClause::Kind::Table) return a.table == b.table;
    return a.alias == b.alias && equal(*a.sub, *b.sub);
}
inline bool equal(const SelectExpr& a, const SelectExpr& b) {
    return equal(a.proj, b.proj) && equal(a.from, b.from) && equal(a.where, b.where);
}
inline bool equal(const SqlExpr& a, const SqlExpr& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, Name>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, IntL>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, StrL>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, BoolL>) return x.value == y.value;
            else if constexpr (std::is_same_v<T, Unary>)
                return x.op == y.op && equal(x.arg, y.arg);
            else if constexpr (std::is_same_v<T, Binary>)
                return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else if constexpr (std::is_same_v<T, SelectExpr>) return equal(x, y);
            else return true;
        },
        a.v);
}

bool equal(const SqlStatement& a, const SqlStatement& b);
inline bool equal(const Stmts& a, const Stmts& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}
inline bool equal(const SqlStatement& a, const SqlStatement& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, Update>) {
                if (x.table != y.table || x.sets.size() != y.sets.size() ||
                    !equal(x.where, y.where))
                    return false;
                for (size_t i = 0; i < x.sets.size(); ++i)
                    if (x.sets[i].first != y.sets[i].first ||
                        !equal(x.sets[i].second, y.sets[i].second))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, Insert>) {
                if (x.table != y.table || x.columns != y.columns ||
                    x.values.size() != y.values.size())
                    return false;
                for (size_t i = 0; i < x.values.size(); ++i)
                    if (!equal(x.values[i], y.values[i])) return false;
                return true;
            } else if constexpr (std::is_same_v<T, SelectInto>)
                return equal(x.proj, y.proj) && x.var == y.var && equal(x.from, y.from) &&
                       equal(x.where, y.where);
            else if constexpr (std::is_same_v<T, CreateTempTableAs>)
                return x.name == y.name && equal(x.select, y.select);
            else if constexpr (std::is_same_v<T, DropTempTable>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, DeclareVar>)
                return x.name == y.name && x.type == y.type;
            else if constexpr (std::is_same_v<T, DeclareCursor>)
                return x.name == y.name && equal(x.select, y.select);
            else if constexpr (std::is_same_v<T, OpenCursor>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, FetchInto>)
                return x.cursor == y.cursor && x.var == y.var;
            else if constexpr (std::is_same_v<T, CloseCursor>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, SetVar>)
                return x.name == y.name && equal(x.value, y.value);
            else if constexpr (std::is_same_v<T, std::shared_ptr<const IfThenElse>>)
                return equal(x->cond, y->cond) && equal(x->then_branch, y->then_branch) &&
                       equal(x->else_branch, y->else_branch);
            else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>)
                return equal(x->cond, y->cond) && equal(x->body, y->body);
            else
                return x.message == y.message;
        },
        a.v);
}
inline bool equal(const SqlProcedure& a, const SqlProcedure& b) {
    return a.name == b.name && a.in_params == b.in_params && a.out_params == b.out_params &&
           equal(a.body, b.body);
}

// ---------------------------------------------------------------------------
// Text emission

namespace emit {

inline std::string q(const std::string& id) { return "`" + id + "`"; }

inline int level(const SqlExpr& e) {
    if (const auto* b = std::get_if<Binary>(&e.v)) {
        switch (b->op) {
            case SqlBinOp::Or: return 1;
            case SqlBinOp::And: return 2;
            case SqlBinOp::Eq: case SqlBinOp::Ne: case SqlBinOp::Lt: case SqlBinOp::Le:
            case SqlBinOp::Gt: case SqlBinOp::Ge: return 4;
            case SqlBinOp::Add: case SqlBinOp::Sub: return 5;
            case SqlBinOp::Mul: return 6;
        }
    }
    if (std::holds_alternative<Unary>(e.v)) return 3;
    return 7;
}

inline const char* op_token(SqlBinOp op) {
    switch (op) {
        case SqlBinOp::Add: return "+";
        case SqlBinOp::Sub: return "-";
        case SqlBinOp::Mul: return "*";
        case SqlBinOp::Eq: return "=";
        case SqlBinOp::Ne: return "<>";
        case SqlBinOp::Lt: return "<";
        case SqlBinOp::Le: return "<=";
        case SqlBinOp::Gt: return ">";
        case SqlBinOp::Ge: return ">=";
        case SqlBinOp::And: return "AND";
        case SqlBinOp::Or: return "OR";
    }
    return "?";
}

void expr(std::ostringstream& os, const SqlExpr& e, int lvl);

inline void select(std::ostringstream& os, const SelectExpr& s, bool parens) {
    if (parens) os << "(";
    os << "SELECT ";
    switch (s.proj.kind) {
        case Projection::Kind::Col: os << q(s.proj.col); break;
        case Projection::Kind::CountCol: os << "COUNT(" << q(s.proj.col) << ")"; break;
        case Projection::Kind::CountStar: os << "COUNT(*)"; break;
        case Projection::Kind::Star: os << "*"; break;
    }
    os << " FROM ";
    if (s.from.kind == FromClause::Kind::Table) {
        os << q(s.from.table);
    } else {
        select(os, *s.from.sub, true);
        os << " AS " << s.from.alias;
    }
    os << " WHERE ";
    expr(os, *s.where, 1);
    if (parens) os << ")";
}

inline void expr(std::ostringstream& os, const SqlExpr& e, int lvl) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Name>) os << q(n.name);
            else if constexpr (std::is_same_v<T, IntL>) os << n.value;
            else if constexpr (std::is_same_v<T, StrL>) os << "'" << n.value << "'";
            else if constexpr (std::is_same_v<T, BoolL>) os << (n.value ? "TRUE" : "FALSE");
            else if constexpr (std::is_same_v<T, NullL>) os << "NULL";
            else if constexpr (std::is_same_v<T, LastInsertId>) os << "last_insert_id ()";
            else if constexpr (std::is_same_v<T, Unary>) {
                os << (n.op == SqlUnOp::Not ? "NOT " : "-");
                int al = level(*n.arg);
                bool p = al < 3;
                if (p) os << "(";
                expr(os, *n.arg, al);
                if (p) os << ")";
            } else if constexpr (std::is_same_v<T, Binary>) {
                auto side = [&](const SqlExprPtr& x, int need) {
                    int xl = level(*x);
                    bool p = xl < need;
                    if (p) os << "(";
                    expr(os, *x, xl);
                    if (p) os << ")";
                };
                side(n.lhs, lvl);
                os << " " << op_token(n.op) << " ";
                side(n.rhs, lvl + 1);
            } else { // SelectExpr
                select(os, n, true);
            }
        },
        e.v);
}

inline std::string expr_text(const SqlExprPtr& e) {
    std::ostringstream os;
    expr(os, *e, 1);
    return os.str();
}

inline void stmt(std::ostringstream& os, const SqlStatement& s, int indent);

inline void stmts(std::ostringstream& os, const Stmts& list, int indent) {
    for (const auto& s : list) stmt(os, s, indent);
}

inline void stmt(std::ostringstream& os, const SqlStatement& s, int indent) {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Update>) {
                os << pad << "UPDATE " << q(n.table) << " SET ";
                for (size_t i = 0; i < n.sets.size(); ++i) {
                    if (i) os << ", ";
                    os << q(n.sets[i].first) << " = " << expr_text(n.sets[i].second);
                }
                os << " WHERE " << expr_text(n.where) << ";\n";
            } else if constexpr (std::is_same_v<T, Insert>) {
                os << pad << "INSERT INTO " << q(n.table) << " (";
                for (size_t i = 0; i < n.columns.size(); ++i) {
                    if (i) os << ", ";
                    os << q(n.columns[i]);
                }
                os << ") VALUE (";
                for (size_t i = 0; i < n.values.size(); ++i) {
                    if (i) os << ", ";
                    os << expr_text(n.values[i]);
                }
                os << ");\n";
            } else if constexpr (std::is_same_v<T, SelectInto>) {
                os << pad << "SELECT ";
                switch (n.proj.kind) {
                    case Projection::Kind::Col: os << q(n.proj.col); break;
                    case Projection::Kind::CountCol:
                        os << "COUNT(" << q(n.proj.col) << ")";
                        break;
                    case Projection::Kind::CountStar: os << "COUNT(*)"; break;
                    case Projection::Kind::Star: os << "*"; break;
                }
                os << " INTO " << q(n.var) << " FROM ";
                if (n.from.kind == FromClause::Kind::Table) os << q(n.from.table);
                else {
                    select(os, *n.from.sub, true);
                    os << " AS " << n.from.alias;
                }
                os << " WHERE " << expr_text(n.where) << ";\n";
            } else if constexpr (std::is_same_v<T, CreateTempTableAs>) {
                os << pad << "CREATE TEMPORARY TABLE " << q(n.name) << " AS ";
                select(os, n.select, false);
                os << ";\n";
            } else if constexpr (std::is_same_v<T, DropTempTable>) {
                os << pad << "DROP TEMPORARY TABLE IF EXISTS " << q(n.name) << ";\n";
            } else if constexpr (std::is_same_v<T, DeclareVar>) {
                os << pad << "DECLARE " << q(n.name) << " " << n.type << ";\n";
            } else if constexpr (std::is_same_v<T, DeclareCursor>) {
                os << pad << "DECLARE " << q(n.name) << " CURSOR FOR ";
                select(os, n.select, true);
                os << ";\n";
            } else if constexpr (std::is_same_v<T, OpenCursor>) {
                os << pad << "OPEN " << q(n.name) << ";\n";
            } else if constexpr (std::is_same_v<T, FetchInto>) {
                os << pad << "FETCH " << q(n.cursor) << " INTO " << q(n.var) << ";\n";
            } else if constexpr (std::is_same_v<T, CloseCursor>) {
                os << pad << "CLOSE " << q(n.name) << ";\n";
            } else if constexpr (std::is_same_v<T, SetVar>) {
                os << pad << "SET " << q(n.name) << " = " << expr_text(n.value) << ";\n";
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const IfThenElse>>) {
                os << pad << "IF " << expr_text(n->cond) << " THEN\n";
                stmts(os, n->then_branch, indent + 1);
                if (!n->else_branch.empty()) {
                    os << pad << "ELSE\n";
                    stmts(os, n->else_branch, indent + 1);
                }
                os << pad << "END IF;\n";
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>) {
                os << pad << "WHILE " << expr_text(n->cond) << " DO\n";
                stmts(os, n->body, indent + 1);
                os << pad << "END WHILE;\n";
            } else {
                os << pad << "SIGNAL '" << n.message << "';\n";
            }
        },
        s.v);
}

} // namespace emit

inline std::string emit_sql_text(const Stmts& list) {
    std::ostringstream os;
    emit::stmts(os, list, 0);
    return os.str();
}

inline std::string emit_sql_text(const SqlProcedure& p) {
    std::ostringstream os;
    os << "CREATE PROCEDURE " << emit::q(p.name) << " (";
    bool first = true;
    for (const auto& [n, t] : p.in_params) {
        if (!first) os << ", ";
        first = false;
        os << "IN " << emit::q(n) << " " << t;
    }
    for (const auto& [n, t] : p.out_params) {
        if (!first) os << ", ";
        first = false;
        os << "OUT " << emit::q(n) << " " << t;
    }
    os << ")\nBEGIN\n";
    emit::stmts(os, p.body, 1);
    os << "END;\n";
    return os.str();
}

} // namespace boosql::sql
