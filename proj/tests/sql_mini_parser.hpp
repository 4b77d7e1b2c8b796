#pragma once

// Test-only parser for the SQL emitter's output; used to check the
// emit-then-parse round trip. Covers exactly the closed statement subset the
// generator produces, nothing more.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "boosql/sql.hpp"

namespace boosql::test {

class SqlMiniParser {
public:
    explicit SqlMiniParser(const std::string& text) { tokenize(text); }

    sql::SqlProcedure procedure() {
        sql::SqlProcedure p;
        kw("CREATE");
        kw("PROCEDURE");
        p.name = quoted();
        punct("(");
        bool first = true;
        while (!peek_punct(")")) {
            if (!first) punct(",");
            first = false;
            bool in = word_is("IN");
            if (!in) kw("OUT");
            else take();
            std::string n = quoted();
            std::string t = type_name();
            (in ? p.in_params : p.out_params).emplace_back(n, t);
        }
        punct(")");
        kw("BEGIN");
        p.body = statements_until("END");
        kw("END");
        punct(";");
        return p;
    }

    sql::Stmts statement_list() { return statements_until(""); }

private:
    struct Tok {
        enum class K { Word, Quoted, Str, Int, Punct, End } k = K::End;
        std::string text;
        long long num = 0;
    };
    std::vector<Tok> toks_;
    size_t i_ = 0;

    [[noreturn]] void fail(const std::string& m) const {
        throw std::runtime_error("sql mini-parser: " + m + " near token " +
                                 std::to_string(i_) + " '" + cur().text + "'");
    }
    const Tok& cur() const { return toks_[std::min(i_, toks_.size() - 1)]; }
    Tok take() { return toks_[i_++]; }
    bool word_is(const char* w) const {
        return cur().k == Tok::K::Word && cur().text == w;
    }
    void kw(const char* w) {
        if (!word_is(w)) fail(std::string("expected ") + w);
        take();
    }
    bool peek_punct(const char* p) const {
        return cur().k == Tok::K::Punct && cur().text == p;
    }
    void punct(const char* p) {
        if (!peek_punct(p)) fail(std::string("expected '") + p + "'");
        take();
    }
    bool accept_punct(const char* p) {
        if (peek_punct(p)) {
            take();
            return true;
        }
        return false;
    }
    std::string quoted() {
        if (cur().k != Tok::K::Quoted) fail("expected a quoted identifier");
        return take().text;
    }

    void tokenize(const std::string& s) {
        size_t p = 0;
        auto push = [&](Tok t) { toks_.push_back(std::move(t)); };
        while (p < s.size()) {
            char c = s[p];
            if (std::isspace(static_cast<unsigned char>(c))) {
                p++;
                continue;
            }
            if (c == '`') {
                size_t e = s.find('`', p + 1);
                push({Tok::K::Quoted, s.substr(p + 1, e - p - 1), 0});
                p = e + 1;
                continue;
            }
            if (c == '\'') {
                size_t e = s.find('\'', p + 1);
                push({Tok::K::Str, s.substr(p + 1, e - p - 1), 0});
                p = e + 1;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                size_t e = p;
                while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) e++;
                push({Tok::K::Int, {}, std::stoll(s.substr(p, e - p))});
                p = e;
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t e = p;
                while (e < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[e])) || s[e] == '_'))
                    e++;
                push({Tok::K::Word, s.substr(p, e - p), 0});
                p = e;
                continue;
            }
            if (c == '<' && p + 1 < s.size() && (s[p + 1] == '>' || s[p + 1] == '=')) {
                push({Tok::K::Punct, s.substr(p, 2), 0});
                p += 2;
                continue;
            }
            if (c == '>' && p + 1 < s.size() && s[p + 1] == '=') {
                push({Tok::K::Punct, ">=", 0});
                p += 2;
                continue;
            }
            push({Tok::K::Punct, std::string(1, c), 0});
            p++;
        }
        push({});
    }

    std::string type_name() {
        if (cur().k != Tok::K::Word) fail("expected a type");
        std::string t = take().text;
        if (accept_punct("(")) {
            t += "(" + std::to_string(take().num) + ")";
            punct(")");
        }
        return t;
    }

    // -- expressions (precedence mirrors the emitter) -----------------------

    sql::SqlExprPtr expr() { return or_level(); }
    sql::SqlExprPtr or_level() {
        auto l = and_level();
        while (word_is("OR")) {
            take();
            l = sql::bin(sql::SqlBinOp::Or, l, and_level());
        }
        return l;
    }
    sql::SqlExprPtr and_level() {
        auto l = not_level();
        while (word_is("AND")) {
            take();
            l = sql::bin(sql::SqlBinOp::And, l, not_level());
        }
        return l;
    }
    sql::SqlExprPtr not_level() {
        if (word_is("NOT")) {
            take();
            return sql::mk<sql::Unary>(sql::SqlUnOp::Not, not_level());
        }
        return cmp_level();
    }
    sql::SqlExprPtr cmp_level() {
        auto l = add_level();
        static const std::pair<const char*, sql::SqlBinOp> ops[] = {
            {"=", sql::SqlBinOp::Eq},  {"<>", sql::SqlBinOp::Ne}, {"<=", sql::SqlBinOp::Le},
            {">=", sql::SqlBinOp::Ge}, {"<", sql::SqlBinOp::Lt},  {">", sql::SqlBinOp::Gt},
        };
        for (const auto& [tok, op] : ops)
            if (peek_punct(tok)) {
                take();
                return sql::bin(op, l, add_level());
            }
        return l;
    }
    sql::SqlExprPtr add_level() {
        auto l = mul_level();
        for (;;) {
            if (peek_punct("+")) {
                take();
                l = sql::bin(sql::SqlBinOp::Add, l, mul_level());
            } else if (peek_punct("-")) {
                take();
                l = sql::bin(sql::SqlBinOp::Sub, l, mul_level());
            } else {
                return l;
            }
        }
    }
    sql::SqlExprPtr mul_level() {
        auto l = atom();
        while (peek_punct("*")) {
            take();
            l = sql::bin(sql::SqlBinOp::Mul, l, atom());
        }
        return l;
    }
    sql::SqlExprPtr atom() {
        if (cur().k == Tok::K::Quoted) return sql::name(take().text);
        if (cur().k == Tok::K::Int) return sql::lit(take().num);
        if (cur().k == Tok::K::Str) return sql::str(take().text);
        if (word_is("TRUE")) {
            take();
            return sql::truth(true);
        }
        if (word_is("FALSE")) {
            take();
            return sql::truth(false);
        }
        if (word_is("NULL")) {
            take();
            return sql::null();
        }
        if (word_is("last_insert_id")) {
            take();
            punct("(");
            punct(")");
            return sql::mk<sql::LastInsertId>();
        }
        if (peek_punct("-")) {
            take();
            return sql::mk<sql::Unary>(sql::SqlUnOp::Neg, atom());
        }
        if (accept_punct("(")) {
            if (word_is("SELECT")) {
                take();
                sql::SelectExpr s = select_tail();
                punct(")");
                return sql::mk<sql::SelectExpr>(s);
            }
            auto e = expr();
            punct(")");
            return e;
        }
        fail("expected an expression");
    }

    sql::Projection projection() {
        sql::Projection pr;
        if (word_is("COUNT")) {
            take();
            punct("(");
            if (accept_punct("*")) {
                pr.kind = sql::Projection::Kind::CountStar;
            } else {
                pr.kind = sql::Projection::Kind::CountCol;
                pr.col = quoted();
            }
            punct(")");
            return pr;
        }
        if (accept_punct("*")) {
            pr.kind = sql::Projection::Kind::Star;
            return pr;
        }
        pr.kind = sql::Projection::Kind::Col;
        pr.col = quoted();
        return pr;
    }

    sql::FromClause from_clause() {
        sql::FromClause f;
        if (cur().k == Tok::K::Quoted) {
            f.kind = sql::FromClause::Kind::Table;
            f.table = quoted();
            return f;
        }
        punct("(");
        kw("SELECT");
        sql::SelectExpr inner = select_tail();
        punct(")");
        kw("AS");
        if (cur().k != Tok::K::Word) fail("expected an alias");
        f.kind = sql::FromClause::Kind::Sub;
        f.sub = std::make_shared<const sql::SelectExpr>(inner);
        f.alias = take().text;
        return f;
    }

    /// after the SELECT keyword: projection FROM source WHERE cond
    sql::SelectExpr select_tail() {
        sql::SelectExpr s;
        s.proj = projection();
        kw("FROM");
        s.from = from_clause();
        kw("WHERE");
        s.where = expr();
        return s;
    }

    // -- statements ----------------------------------------------------------

    sql::Stmts statements_until(const std::string& terminator) {
        sql::Stmts out;
        while (cur().k != Tok::K::End) {
            if (!terminator.empty() && word_is(terminator.c_str())) break;
            if (word_is("ELSE") || word_is("END")) break;
            out.push_back(statement());
        }
        return out;
    }

    sql::SqlStatement statement() {
        if (word_is("UPDATE")) {
            take();
            sql::Update u;
            u.table = quoted();
            kw("SET");
            bool first = true;
            while (first || accept_punct(",")) {
                first = false;
                std::string col = quoted();
                punct("=");
                u.sets.emplace_back(col, expr());
            }
            kw("WHERE");
            u.where = expr();
            punct(";");
            return {u};
        }
        if (word_is("INSERT")) {
            take();
            kw("INTO");
            sql::Insert ins;
            ins.table = quoted();
            punct("(");
            while (!peek_punct(")")) {
                if (!ins.columns.empty()) punct(",");
                ins.columns.push_back(quoted());
            }
            punct(")");
            kw("VALUE");
            punct("(");
            while (!peek_punct(")")) {
                if (!ins.values.empty()) punct(",");
                ins.values.push_back(expr());
            }
            punct(")");
            punct(";");
            return {ins};
        }
        if (word_is("SELECT")) {
            take();
            sql::SelectInto si;
            si.proj = projection();
            kw("INTO");
            si.var = quoted();
            kw("FROM");
            si.from = from_clause();
            kw("WHERE");
            si.where = expr();
            punct(";");
            return {si};
        }
        if (word_is("CREATE")) {
            take();
            kw("TEMPORARY");
            kw("TABLE");
            sql::CreateTempTableAs ct;
            ct.name = quoted();
            kw("AS");
            kw("SELECT");
            ct.select = select_tail();
            punct(";");
            return {ct};
        }
        if (word_is("DROP")) {
            take();
            kw("TEMPORARY");
            kw("TABLE");
            kw("IF");
            kw("EXISTS");
            sql::DropTempTable d{quoted()};
            punct(";");
            return {d};
        }
        if (word_is("DECLARE")) {
            take();
            std::string n = quoted();
            if (word_is("CURSOR")) {
                take();
                kw("FOR");
                punct("(");
                kw("SELECT");
                sql::DeclareCursor dc{n, select_tail()};
                punct(")");
                punct(";");
                return {dc};
            }
            sql::DeclareVar dv{n, type_name()};
            punct(";");
            return {dv};
        }
        if (word_is("OPEN")) {
            take();
            sql::OpenCursor oc{quoted()};
            punct(";");
            return {oc};
        }
        if (word_is("FETCH")) {
            take();
            std::string c = quoted();
            kw("INTO");
            sql::FetchInto fi{c, quoted()};
            punct(";");
            return {fi};
        }
        if (word_is("CLOSE")) {
            take();
            sql::CloseCursor cc{quoted()};
            punct(";");
            return {cc};
        }
        if (word_is("SET")) {
            take();
            std::string n = quoted();
            punct("=");
            sql::SetVar sv{n, expr()};
            punct(";");
            return {sv};
        }
        if (word_is("IF")) {
            take();
            sql::SqlExprPtr cond = expr();
            kw("THEN");
            sql::Stmts then_b = statements_until("");
            sql::Stmts else_b;
            if (word_is("ELSE")) {
                take();
                else_b = statements_until("");
            }
            kw("END");
            kw("IF");
            punct(";");
            return sql::if_stmt(cond, std::move(then_b), std::move(else_b));
        }
        if (word_is("WHILE")) {
            take();
            sql::SqlExprPtr cond = expr();
            kw("DO");
            sql::Stmts body = statements_until("");
            kw("END");
            kw("WHILE");
            punct(";");
            return sql::while_stmt(cond, std::move(body));
        }
        if (word_is("SIGNAL")) {
            take();
            if (cur().k != Tok::K::Str) fail("expected a message");
            sql::Signal sg{take().text};
            punct(";");
            return {sg};
        }
        fail("unknown statement");
    }
};

inline sql::SqlProcedure parse_procedure_text(const std::string& text) {
    return SqlMiniParser(text).procedure();
}
inline sql::Stmts parse_statements_text(const std::string& text) {
    return SqlMiniParser(text).statement_list();
}

} // namespace boosql::test
