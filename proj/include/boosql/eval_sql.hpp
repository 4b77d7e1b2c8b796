#pragma once

// Deterministic in-memory evaluator for the SQL subset. Tables hold sets of
// tuples kept in a canonical order (sorted by column values, oid first) so
// cursor iteration is reproducible; temp tables are procedure-scoped; WHILE
// runs under a fuel bound derived from the loop variant.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boosql/sql.hpp"
#include "boosql/tables.hpp"

namespace boosql {

struct ScalarValue {
    enum class Kind { Null, Int, Str, Bool } kind = Kind::Null;
    long long num = 0;
    std::string text;

    static ScalarValue null() { return {}; }
    static ScalarValue integer(long long v) { return {Kind::Int, v, {}}; }
    static ScalarValue string(std::string s) { return {Kind::Str, 0, std::move(s)}; }
    static ScalarValue boolean(bool b) { return {Kind::Bool, b ? 1 : 0, {}}; }
    bool is_null() const { return kind == Kind::Null; }
};

inline int scalar_cmp(const ScalarValue& a, const ScalarValue& b) {
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    switch (a.kind) {
        case ScalarValue::Kind::Null: return 0;
        case ScalarValue::Kind::Int:
        case ScalarValue::Kind::Bool:
            return a.num < b.num ? -1 : a.num > b.num ? 1 : 0;
        case ScalarValue::Kind::Str:
            return a.text < b.text ? -1 : a.text > b.text ? 1 : 0;
    }
    return 0;
}
inline bool operator==(const ScalarValue& a, const ScalarValue& b) {
    return scalar_cmp(a, b) == 0;
}

inline std::string scalar_str(const ScalarValue& v) {
    switch (v.kind) {
        case ScalarValue::Kind::Null: return "NULL";
        case ScalarValue::Kind::Int: return std::to_string(v.num);
        case ScalarValue::Kind::Bool: return v.num ? "TRUE" : "FALSE";
        case ScalarValue::Kind::Str: return "'" + v.text + "'";
    }
    return "?";
}

struct Tuple {
    std::map<std::string, ScalarValue> values;
    friend bool operator==(const Tuple& a, const Tuple& b) {
        if (a.values.size() != b.values.size()) return false;
        auto it = b.values.begin();
        for (const auto& [k, v] : a.values) {
            if (it->first != k || !(it->second == v)) return false;
            ++it;
        }
        return true;
    }
};

struct SqlTable {
    TableSpec spec;
    std::vector<Tuple> rows; // canonical order, no exact duplicates
    long long auto_increment = 0;

    void canonicalise() {
        auto cmp = [&](const Tuple& a, const Tuple& b) {
            for (const auto& c : spec.columns) {
                auto av = a.values.find(c.name);
                auto bv = b.values.find(c.name);
                ScalarValue x = av == a.values.end() ? ScalarValue::null() : av->second;
                ScalarValue y = bv == b.values.end() ? ScalarValue::null() : bv->second;
                if (int r = scalar_cmp(x, y)) return r < 0;
            }
            return false;
        };
        std::sort(rows.begin(), rows.end(), cmp);
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    }

    friend bool operator==(const SqlTable& a, const SqlTable& b) {
        return a.rows == b.rows && a.auto_increment == b.auto_increment;
    }
};

struct DbState {
    std::map<std::string, SqlTable> tables;
    std::map<std::string, SqlTable> temps; // procedure-scoped
    long long last_insert_id = 0;

    static DbState from_schema(const TableModel& tm) {
        DbState db;
        for (const auto& [name, spec] : tm.all_specs) db.tables[name] = SqlTable{spec, {}, 0};
        return db;
    }

    SqlTable* find_table(const std::string& n) {
        if (auto it = temps.find(n); it != temps.end()) return &it->second;
        if (auto it = tables.find(n); it != tables.end()) return &it->second;
        return nullptr;
    }
    const SqlTable* find_table(const std::string& n) const {
        if (auto it = temps.find(n); it != temps.end()) return &it->second;
        if (auto it = tables.find(n); it != tables.end()) return &it->second;
        return nullptr;
    }

    friend bool operator==(const DbState& a, const DbState& b) {
        return a.tables == b.tables; // temps are transient
    }
};

/// Variable store, cursor registry and execution budget for one procedure run.
struct SqlIo {
    std::map<std::string, ScalarValue> vars;
    struct Cursor {
        sql::SelectExpr select;
        std::vector<Tuple> snapshot;
        std::vector<std::string> columns;
        size_t pos = 0;
        bool open = false;
    };
    std::map<std::string, Cursor> cursors;
    long long steps = 0;
    long long step_limit = 1000000;
    bool check_invariants = true;
};

// ---------------------------------------------------------------------------
// Invariants

inline std::vector<std::string> check_db_invariants(const DbState& db) {
    std::vector<std::string> out;
    auto check = [&](const SqlTable& t) {
        std::string pk;
        for (const auto& c : t.spec.columns)
            if (c.primary_key) pk = c.name;
        std::vector<long long> seen;
        for (const auto& row : t.rows) {
            if (row.values.size() != t.spec.columns.size())
                out.push_back("tuple domain mismatch in " + t.spec.name);
            for (const auto& c : t.spec.columns)
                if (!row.values.count(c.name))
                    out.push_back("tuple in " + t.spec.name + " misses column " + c.name);
            if (!pk.empty()) {
                auto it = row.values.find(pk);
                if (it != row.values.end() && it->second.kind == ScalarValue::Kind::Int)
                    seen.push_back(it->second.num);
            }
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            out.push_back("primary key not unique in " + t.spec.name);
    };
    for (const auto& [n, t] : db.tables) check(t);
    for (const auto& [n, t] : db.temps) check(t);
    return out;
}

// ---------------------------------------------------------------------------
// Expression evaluation

namespace sql_eval {

using namespace sql;

struct RowScope {
    const Tuple* row;
};

struct Env {
    DbState* db;
    SqlIo* io;
    std::vector<RowScope> rows; // innermost last
};

inline ScalarValue lookup_name(const Env& env, const std::string& n) {
    for (auto it = env.rows.rbegin(); it != env.rows.rend(); ++it) {
        auto v = it->row->values.find(n);
        if (v != it->row->values.end()) return v->second;
    }
    auto v = env.io->vars.find(n);
    if (v != env.io->vars.end()) return v->second;
    throw SqlError(SqlError::Kind::MissingVariable, "unknown name `" + n + "`");
}

inline long long as_int(const ScalarValue& v, const char* what) {
    if (v.kind != ScalarValue::Kind::Int)
        throw SqlError(SqlError::Kind::Other,
                       std::string(what) + " needs an integer, got " + scalar_str(v));
    return v.num;
}
inline bool as_bool(const ScalarValue& v) {
    if (v.kind == ScalarValue::Kind::Bool) return v.num != 0;
    throw SqlError(SqlError::Kind::Other, "expected a boolean, got " + scalar_str(v));
}

struct Resolved {
    std::vector<Tuple> rows;
    std::vector<std::string> columns;
};

ScalarValue eval_expr(Env& env, const SqlExprPtr& e);

/// Rows of a FROM source after the WHERE filter, plus the projected columns.
inline Resolved eval_select_rows(Env& env, const SelectExpr& sel) {
    Resolved src;
    if (sel.from.kind == FromClause::Kind::Table) {
        const SqlTable* t = env.db->find_table(sel.from.table);
        if (!t)
            throw SqlError(SqlError::Kind::MissingTable,
                           "no table `" + sel.from.table + "`");
        src.rows = t->rows;
        for (const auto& c : t->spec.columns) src.columns.push_back(c.name);
    } else {
        Resolved inner = eval_select_rows(env, *sel.from.sub);
        src = std::move(inner);
    }

    Resolved out;
    std::vector<Tuple> filtered;
    for (const auto& row : src.rows) {
        env.rows.push_back({&row});
        bool keep;
        try {
            keep = as_bool(eval_expr(env, sel.where));
        } catch (...) {
            env.rows.pop_back();
            throw;
        }
        env.rows.pop_back();
        if (keep) filtered.push_back(row);
    }

    switch (sel.proj.kind) {
        case Projection::Kind::Star:
            out.rows = std::move(filtered);
            out.columns = src.columns;
            return out;
        case Projection::Kind::Col: {
            out.columns = {sel.proj.col};
            for (const auto& row : filtered) {
                auto it = row.values.find(sel.proj.col);
                if (it == row.values.end())
                    throw SqlError(SqlError::Kind::MissingColumn,
                                   "no column `" + sel.proj.col + "`");
                Tuple t;
                t.values[sel.proj.col] = it->second;
                out.rows.push_back(std::move(t));
            }
            return out;
        }
        case Projection::Kind::CountCol:
        case Projection::Kind::CountStar: {
            // COUNT(c) counts rows, like COUNT(*); the column is not inspected
            out.columns = {"count"};
            Tuple t;
            t.values["count"] = ScalarValue::integer(static_cast<long long>(filtered.size()));
            out.rows.push_back(std::move(t));
            return out;
        }
    }
    throw SqlError(SqlError::Kind::Other, "unreachable projection");
}

/// A SELECT in expression position: COUNTs give the count; a column
/// projection must yield at most one row (zero rows bind NULL).
inline ScalarValue eval_select_scalar(Env& env, const SelectExpr& sel) {
    Resolved r = eval_select_rows(env, sel);
    if (sel.proj.kind == Projection::Kind::CountCol ||
        sel.proj.kind == Projection::Kind::CountStar)
        return r.rows[0].values.at("count");
    if (r.rows.empty()) return ScalarValue::null();
    if (r.rows.size() > 1)
        throw SqlError(SqlError::Kind::NotScalar, "subquery yields more than one row");
    return r.rows[0].values.begin()->second;
}

inline ScalarValue eval_expr(Env& env, const SqlExprPtr& e) {
    env.io->steps++;
    if (env.io->steps > env.io->step_limit)
        throw SqlError(SqlError::Kind::FuelExhausted, "statement budget exhausted");
    return std::visit(
        [&](const auto& n) -> ScalarValue {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Name>) return lookup_name(env, n.name);
            else if constexpr (std::is_same_v<T, IntL>) return ScalarValue::integer(n.value);
            else if constexpr (std::is_same_v<T, StrL>) return ScalarValue::string(n.value);
            else if constexpr (std::is_same_v<T, BoolL>) return ScalarValue::boolean(n.value);
            else if constexpr (std::is_same_v<T, NullL>) return ScalarValue::null();
            else if constexpr (std::is_same_v<T, LastInsertId>)
                return ScalarValue::integer(env.db->last_insert_id);
            else if constexpr (std::is_same_v<T, sql::Unary>) {
                ScalarValue a = eval_expr(env, n.arg);
                if (n.op == SqlUnOp::Neg) return ScalarValue::integer(-as_int(a, "negation"));
                return ScalarValue::boolean(!as_bool(a));
            } else if constexpr (std::is_same_v<T, sql::Binary>) {
                switch (n.op) {
                    case SqlBinOp::And: {
                        if (!as_bool(eval_expr(env, n.lhs))) return ScalarValue::boolean(false);
                        return ScalarValue::boolean(as_bool(eval_expr(env, n.rhs)));
                    }
                    case SqlBinOp::Or: {
                        if (as_bool(eval_expr(env, n.lhs))) return ScalarValue::boolean(true);
                        return ScalarValue::boolean(as_bool(eval_expr(env, n.rhs)));
                    }
                    default: break;
                }
                ScalarValue l = eval_expr(env, n.lhs);
                ScalarValue r = eval_expr(env, n.rhs);
                switch (n.op) {
                    case SqlBinOp::Add:
                        return ScalarValue::integer(as_int(l, "+") + as_int(r, "+"));
                    case SqlBinOp::Sub:
                        return ScalarValue::integer(as_int(l, "-") - as_int(r, "-"));
                    case SqlBinOp::Mul:
                        return ScalarValue::integer(as_int(l, "*") * as_int(r, "*"));
                    case SqlBinOp::Eq: return ScalarValue::boolean(l == r);
                    case SqlBinOp::Ne: return ScalarValue::boolean(!(l == r));
                    case SqlBinOp::Lt:
                        return ScalarValue::boolean(as_int(l, "<") < as_int(r, "<"));
                    case SqlBinOp::Le:
                        return ScalarValue::boolean(as_int(l, "<=") <= as_int(r, "<="));
                    case SqlBinOp::Gt:
                        return ScalarValue::boolean(as_int(l, ">") > as_int(r, ">"));
                    case SqlBinOp::Ge:
                        return ScalarValue::boolean(as_int(l, ">=") >= as_int(r, ">="));
                    default:
                        throw SqlError(SqlError::Kind::Other, "unreachable operator");
                }
            } else { // SelectExpr
                return eval_select_scalar(env, n);
            }
        },
        e->v);
}

// ---------------------------------------------------------------------------
// Statement execution (in place)

void exec_stmt(Env& env, const SqlStatement& st);

inline void exec_stmts(Env& env, const Stmts& list) {
    for (const auto& st : list) exec_stmt(env, st);
}

inline void post_mutation_check(Env& env, const SqlTable& t) {
    if (!env.io->check_invariants) return;
    std::string pk;
    for (const auto& c : t.spec.columns)
        if (c.primary_key) pk = c.name;
    if (pk.empty()) return;
    std::vector<long long> seen;
    for (const auto& row : t.rows) {
        auto it = row.values.find(pk);
        if (it != row.values.end() && it->second.kind == ScalarValue::Kind::Int)
            seen.push_back(it->second.num);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw SqlError(SqlError::Kind::Other,
                       "primary key uniqueness violated in " + t.spec.name);
}

inline void exec_stmt(Env& env, const SqlStatement& st) {
    env.io->steps++;
    if (env.io->steps > env.io->step_limit)
        throw SqlError(SqlError::Kind::FuelExhausted, "statement budget exhausted");
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Update>) {
                SqlTable* t = env.db->find_table(n.table);
                if (!t) throw SqlError(SqlError::Kind::MissingTable, "no table `" + n.table + "`");
                // evaluate conditions and replacement values against pre-state rows
                std::vector<Tuple> next = t->rows;
                for (size_t i = 0; i < t->rows.size(); ++i) {
                    env.rows.push_back({&t->rows[i]});
                    bool hit = as_bool(eval_expr(env, n.where));
                    if (hit)
                        for (const auto& [col, e] : n.sets) {
                            if (!t->spec.find_column(col))
                                throw SqlError(SqlError::Kind::MissingColumn,
                                               "no column `" + col + "`");
                            next[i].values[col] = eval_expr(env, e);
                        }
                    env.rows.pop_back();
                }
                t->rows = std::move(next);
                t->canonicalise();
                post_mutation_check(env, *t);
            } else if constexpr (std::is_same_v<T, Insert>) {
                SqlTable* t = env.db->find_table(n.table);
                if (!t) throw SqlError(SqlError::Kind::MissingTable, "no table `" + n.table + "`");
                if (n.columns.size() != n.values.size())
                    throw SqlError(SqlError::Kind::BadStatement, "INSERT arity mismatch");
                Tuple row;
                for (const auto& c : t->spec.columns) row.values[c.name] = ScalarValue::null();
                for (size_t i = 0; i < n.columns.size(); ++i) {
                    if (!t->spec.find_column(n.columns[i]))
                        throw SqlError(SqlError::Kind::MissingColumn,
                                       "no column `" + n.columns[i] + "`");
                    row.values[n.columns[i]] = eval_expr(env, n.values[i]);
                }
                for (const auto& c : t->spec.columns)
                    if (c.auto_increment && row.values[c.name].is_null()) {
                        row.values[c.name] = ScalarValue::integer(++t->auto_increment);
                        env.db->last_insert_id = t->auto_increment;
                    }
                t->rows.push_back(std::move(row));
                t->canonicalise();
                post_mutation_check(env, *t);
            } else if constexpr (std::is_same_v<T, SelectInto>) {
                SelectExpr sel{n.proj, n.from, n.where};
                env.io->vars[n.var] = eval_select_scalar(env, sel);
            } else if constexpr (std::is_same_v<T, CreateTempTableAs>) {
                Resolved r = eval_select_rows(env, n.select);
                SqlTable t;
                t.spec.name = n.name;
                for (const auto& c : r.columns)
                    t.spec.columns.push_back({c, "INTEGER", true, false, false});
                // a hidden row number keeps duplicate projected values apart
                // (sequence caches must preserve multiplicity)
                t.spec.columns.push_back({"rownum", "INTEGER", false, false, false});
                long long rn = 0;
                for (auto& row : r.rows) row.values["rownum"] = ScalarValue::integer(++rn);
                t.rows = std::move(r.rows);
                t.canonicalise();
                env.db->temps[n.name] = std::move(t);
            } else if constexpr (std::is_same_v<T, DropTempTable>) {
                env.db->temps.erase(n.name);
            } else if constexpr (std::is_same_v<T, DeclareVar>) {
                env.io->vars[n.name] = ScalarValue::null();
            } else if constexpr (std::is_same_v<T, DeclareCursor>) {
                SqlIo::Cursor c;
                c.select = n.select;
                env.io->cursors[n.name] = std::move(c);
            } else if constexpr (std::is_same_v<T, OpenCursor>) {
                auto it = env.io->cursors.find(n.name);
                if (it == env.io->cursors.end())
                    throw SqlError(SqlError::Kind::BadStatement,
                                   "no cursor `" + n.name + "`");
                Resolved r = eval_select_rows(env, it->second.select);
                it->second.snapshot = std::move(r.rows);
                it->second.columns = std::move(r.columns);
                it->second.pos = 0;
                it->second.open = true;
            } else if constexpr (std::is_same_v<T, FetchInto>) {
                auto it = env.io->cursors.find(n.cursor);
                if (it == env.io->cursors.end() || !it->second.open)
                    throw SqlError(SqlError::Kind::BadStatement,
                                   "fetch from a cursor that is not open");
                auto& c = it->second;
                if (c.pos >= c.snapshot.size()) {
                    // past the end: bind NULL; the loop variant protects uses
                    env.io->vars[n.var] = ScalarValue::null();
                } else {
                    const Tuple& row = c.snapshot[c.pos++];
                    const std::string& col = c.columns.front();
                    env.io->vars[n.var] = row.values.at(col);
                }
            } else if constexpr (std::is_same_v<T, CloseCursor>) {
                auto it = env.io->cursors.find(n.name);
                if (it != env.io->cursors.end()) it->second.open = false;
            } else if constexpr (std::is_same_v<T, SetVar>) {
                env.io->vars[n.name] = eval_expr(env, n.value);
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const IfThenElse>>) {
                if (as_bool(eval_expr(env, n->cond))) exec_stmts(env, n->then_branch);
                else exec_stmts(env, n->else_branch);
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const While>>) {
                // fuel: variant value at entry + slack for variant-shaped loops
                long long fuel = env.io->step_limit;
                if (const auto* cond = std::get_if<sql::Binary>(&n->cond->v)) {
                    if (cond->op == SqlBinOp::Gt &&
                        std::holds_alternative<Name>(cond->lhs->v)) {
                        ScalarValue v =
                            lookup_name(env, std::get<Name>(cond->lhs->v).name);
                        if (v.kind == ScalarValue::Kind::Int) fuel = std::max(v.num, 0LL) + 1;
                    }
                }
                long long iterations = 0;
                while (as_bool(eval_expr(env, n->cond))) {
                    if (++iterations > fuel)
                        throw SqlError(SqlError::Kind::FuelExhausted,
                                       "loop exceeded its variant bound");
                    exec_stmts(env, n->body);
                }
            } else { // Signal
                throw SqlError(SqlError::Kind::Signalled, n.message);
            }
        },
        st.v);
}

} // namespace sql_eval

/// Evaluate one expression against a database state and variable bindings.
inline ScalarValue eval_sql_expr(const DbState& db, const SqlIo& io,
                                 const sql::SqlExprPtr& e) {
    DbState db2 = db;
    SqlIo io2 = io;
    sql_eval::Env env{&db2, &io2, {}};
    return sql_eval::eval_expr(env, e);
}

/// One-statement relational effect (functional form).
inline std::pair<DbState, SqlIo> eval_sql_stmt(const DbState& db, const SqlIo& io,
                                               const sql::SqlStatement& st) {
    DbState db2 = db;
    SqlIo io2 = io;
    sql_eval::Env env{&db2, &io2, {}};
    sql_eval::exec_stmt(env, st);
    return {std::move(db2), std::move(io2)};
}

/// Collection-valued procedure inputs, materialised as one-column tables
/// named after the parameter.
struct TableInput {
    std::string column = "value";
    std::vector<ScalarValue> values;
};

/// Runs a procedure: binds IN parameters, executes the body sequentially,
/// collects OUT parameters, drops temp tables at exit.
inline std::pair<DbState, SqlIo> eval_sql_proc(
    const DbState& db, const std::map<std::string, ScalarValue>& inputs,
    const std::map<std::string, TableInput>& table_inputs, const sql::SqlProcedure& proc,
    bool check_invariants = true) {
    DbState db2 = db;
    SqlIo io;
    io.check_invariants = check_invariants;
    for (const auto& [n, t] : proc.in_params) {
        if (table_inputs.count(n)) {
            io.vars[n] = ScalarValue::string(n); // the table carries the data
            continue;
        }
        auto it = inputs.find(n);
        if (it == inputs.end())
            throw SqlError(SqlError::Kind::MissingVariable,
                           "IN parameter `" + n + "` is not bound");
        io.vars[n] = it->second;
    }
    for (const auto& [n, ti] : table_inputs) {
        SqlTable t;
        t.spec.name = n;
        t.spec.columns.push_back({ti.column, "CHAR(30)", true, false, false});
        for (const auto& v : ti.values) {
            Tuple row;
            row.values[ti.column] = v;
            t.rows.push_back(std::move(row));
        }
        t.canonicalise();
        db2.temps[n] = std::move(t);
    }
    for (const auto& [n, t] : proc.out_params) io.vars[n] = ScalarValue::null();

    sql_eval::Env env{&db2, &io, {}};
    sql_eval::exec_stmts(env, proc.body);

    db2.temps.clear();
    SqlIo out;
    out.steps = io.steps;
    for (const auto& [n, t] : proc.out_params) out.vars[n] = io.vars[n];
    return {std::move(db2), std::move(out)};
}

// ---------------------------------------------------------------------------
// Serialisation: per-table CSV-like blocks with a header row

inline std::string serialize_db_state(const DbState& db) {
    std::ostringstream os;
    for (const auto& [name, t] : db.tables) {
        os << "table " << name << "\n";
        for (size_t i = 0; i < t.spec.columns.size(); ++i) {
            if (i) os << ",";
            os << t.spec.columns[i].name;
        }
        os << "\n";
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < t.spec.columns.size(); ++i) {
                if (i) os << ",";
                auto it = row.values.find(t.spec.columns[i].name);
                os << scalar_str(it == row.values.end() ? ScalarValue::null() : it->second);
            }
            os << "\n";
        }
    }
    return os.str();
}

inline DbState parse_db_state(const TableModel& tm, const std::string& text) {
    DbState db = DbState::from_schema(tm);
    std::istringstream is(text);
    std::string line;
    SqlTable* cur = nullptr;
    std::vector<std::string> header;
    bool expect_header = false;
    auto parse_scalar = [](const std::string& s) -> ScalarValue {
        if (s == "NULL") return ScalarValue::null();
        if (s == "TRUE") return ScalarValue::boolean(true);
        if (s == "FALSE") return ScalarValue::boolean(false);
        if (!s.empty() && s.front() == '\'')
            return ScalarValue::string(s.substr(1, s.size() - 2));
        return ScalarValue::integer(std::stoll(s));
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("table ", 0) == 0) {
            std::string name = line.substr(6);
            cur = &db.tables[name];
            if (cur->spec.name.empty()) cur->spec.name = name;
            expect_header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (expect_header) {
            header = cells;
            expect_header = false;
            continue;
        }
        if (!cur) continue;
        Tuple row;
        for (const auto& c : cur->spec.columns) row.values[c.name] = ScalarValue::null();
        for (size_t i = 0; i < cells.size() && i < header.size(); ++i)
            row.values[header[i]] = parse_scalar(cells[i]);
        cur->rows.push_back(std::move(row));
    }
    for (auto& [n, t] : db.tables) {
        t.canonicalise();
        for (const auto& c : t.spec.columns)
            if (c.auto_increment)
                for (const auto& row : t.rows)
                    if (auto it = row.values.find(c.name);
                        it != row.values.end() && it->second.kind == ScalarValue::Kind::Int)
                        t.auto_increment = std::max(t.auto_increment, it->second.num);
    }
    return db;
}

} // namespace boosql
