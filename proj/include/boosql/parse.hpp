#pragma once

// Frontend: lexer and recursive-descent parser for the model DSL (.boo files,
// class blocks with attributes/operations sections plus value-set blocks) and
// for guarded-substitution programs.

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "boosql/gsl.hpp"

namespace boosql {

struct SourceUnit {
    std::string text;
    std::string origin = "<memory>";
};

namespace lex {

enum class Tok {
    End, Ident, DecIdent, Int, Str,
    // punctuation / operators
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Dot, Comma, Colon, Semi, Star, At, Bang, Hash,
    Assign,        // :=
    GuardArrow,    // ==> or -->
    ParBar,        // ||
    ChoiceBox,     // []
    Plus, Minus, Caret, Union, // + - ^ \/
    Eq, Ne, Lt, Le, Gt, Ge, Amp, Implies, // = /= < <= > >= & =>
};

struct Token {
    Tok kind = Tok::End;
    std::string text;   // identifier (decoration included) or string body
    long long value = 0;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

private:
    const std::string& src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    char peek(size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') { line_++; col_ = 1; } else col_++;
        return c;
    }
    void skip_space() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek())))
                advance();
            if (peek() == '-' && peek(1) == '-' && peek(2) != '>') { // line comment
                while (pos_ < src_.size() && peek() != '\n') advance();
                continue;
            }
            break;
        }
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError({line_, col_}, msg);
    }

    Token next() {
        SourceLoc loc{line_, col_};
        if (pos_ >= src_.size()) return {Tok::End, "", 0, loc};
        char c = peek();
        auto tok = [&](Tok k, int len, std::string text = {}) {
            for (int i = 0; i < len; ++i) advance();
            return Token{k, std::move(text), 0, loc};
        };
        if (std::isdigit(static_cast<unsigned char>(c))) {
            long long v = 0;
            while (std::isdigit(static_cast<unsigned char>(peek())))
                v = v * 10 + (advance() - '0');
            return {Tok::Int, "", v, loc};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
                id += advance();
            if (peek() == '?' || peek() == '!') {
                id += advance();
                return {Tok::DecIdent, id, 0, loc};
            }
            return {Tok::Ident, id, 0, loc};
        }
        if (c == '"') {
            advance();
            std::string s;
            while (peek() != '"') {
                if (pos_ >= src_.size()) fail("unterminated string literal");
                if (peek() == '\\') advance();
                s += advance();
            }
            advance();
            return {Tok::Str, s, 0, loc};
        }
        switch (c) {
            case '{': return tok(Tok::LBrace, 1);
            case '}': return tok(Tok::RBrace, 1);
            case '(': return tok(Tok::LParen, 1);
            case ')': return tok(Tok::RParen, 1);
            case '[':
                if (peek(1) == ']') return tok(Tok::ChoiceBox, 2);
                return tok(Tok::LBracket, 1);
            case ']': return tok(Tok::RBracket, 1);
            case '.': return tok(Tok::Dot, 1);
            case ',': return tok(Tok::Comma, 1);
            case ';': return tok(Tok::Semi, 1);
            case '*': return tok(Tok::Star, 1);
            case '@': return tok(Tok::At, 1);
            case '!': return tok(Tok::Bang, 1);
            case '#': return tok(Tok::Hash, 1);
            case '&': return tok(Tok::Amp, 1);
            case '+': return tok(Tok::Plus, 1);
            case '^': return tok(Tok::Caret, 1);
            case ':':
                if (peek(1) == '=') return tok(Tok::Assign, 2);
                return tok(Tok::Colon, 1);
            case '|':
                if (peek(1) == '|') return tok(Tok::ParBar, 2);
                fail("stray '|'");
            case '\\':
                if (peek(1) == '/') return tok(Tok::Union, 2);
                fail("stray '\\'");
            case '=':
                if (peek(1) == '=' && peek(2) == '>') return tok(Tok::GuardArrow, 3);
                if (peek(1) == '>') return tok(Tok::Implies, 2);
                return tok(Tok::Eq, 1);
            case '/':
                if (peek(1) == '=') return tok(Tok::Ne, 2);
                fail("stray '/'");
            case '<':
                if (peek(1) == '=') return tok(Tok::Le, 2);
                return tok(Tok::Lt, 1);
            case '>':
                if (peek(1) == '=') return tok(Tok::Ge, 2);
                return tok(Tok::Gt, 1);
            case '-':
                if (peek(1) == '-' && peek(2) == '>') return tok(Tok::GuardArrow, 3);
                return tok(Tok::Minus, 1);
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
    }
};

} // namespace lex

namespace detail {

class Parser {
public:
    explicit Parser(const SourceUnit& src) : toks_(lex::Lexer(src.text).run()) {}

    BoosterModel model(const std::string& name) {
        BoosterModel m;
        m.name = name;
        while (!at(lex::Tok::End)) {
            if (accept_kw("class"))
                m.classes.push_back(class_decl());
            else if (accept_kw("set"))
                m.value_sets.push_back(value_set_decl());
            else
                fail("expected 'class' or 'set' declaration");
        }
        return m;
    }

    SubPtr substitution_only() {
        SubPtr s = substitution();
        expect(lex::Tok::End, "end of input");
        return s;
    }

    ExprPtr expression_only() {
        ExprPtr e = expression();
        expect(lex::Tok::End, "end of input");
        return e;
    }

private:
    std::vector<lex::Token> toks_;
    size_t i_ = 0;

    const lex::Token& cur() const { return toks_[i_]; }
    const lex::Token& peek(size_t off = 1) const {
        return toks_[std::min(i_ + off, toks_.size() - 1)];
    }
    bool at(lex::Tok k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return at(lex::Tok::Ident) && cur().text == kw; }
    lex::Token take() { return toks_[i_++]; }
    bool accept(lex::Tok k) {
        if (at(k)) { ++i_; return true; }
        return false;
    }
    bool accept_kw(const char* kw) {
        if (at_kw(kw)) { ++i_; return true; }
        return false;
    }
    lex::Token expect(lex::Tok k, const char* what) {
        if (!at(k)) fail(std::string("expected ") + what);
        return take();
    }
    std::string expect_ident(const char* what) {
        if (!at(lex::Tok::Ident)) fail(std::string("expected ") + what);
        return take().text;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur().loc, msg); }

    // -- model ------------------------------------------------------------

    ValueSetDecl value_set_decl() {
        ValueSetDecl vs;
        vs.name = expect_ident("value-set name");
        expect(lex::Tok::LBrace, "'{'");
        if (!at(lex::Tok::RBrace)) {
            vs.members.push_back(expect_ident("member name"));
            while (accept(lex::Tok::Comma)) vs.members.push_back(expect_ident("member name"));
        }
        expect(lex::Tok::RBrace, "'}'");
        return vs;
    }

    ClassDecl class_decl() {
        ClassDecl c;
        c.name = expect_ident("class name");
        expect(lex::Tok::LBrace, "'{'");
        if (accept_kw("attributes")) {
            while (at(lex::Tok::Ident) && !at_kw("operations") && peek().kind == lex::Tok::Colon)
                c.properties.push_back(property_decl());
        }
        if (accept_kw("operations")) {
            while (at(lex::Tok::Ident) && peek().kind == lex::Tok::LBrace) {
                OperationDecl op;
                op.name = take().text;
                expect(lex::Tok::LBrace, "'{'");
                op.body = substitution();
                expect(lex::Tok::RBrace, "'}'");
                c.operations.push_back(std::move(op));
            }
        }
        expect(lex::Tok::RBrace, "'}'");
        for (size_t a = 0; a < c.properties.size(); ++a)
            for (size_t b = a + 1; b < c.properties.size(); ++b)
                if (c.properties[a].name == c.properties[b].name)
                    fail("duplicate property '" + c.properties[a].name + "' in class " + c.name);
        return c;
    }

    // typeref := '[' base ']' | ('set'|'seq') '(' base ')' '*' | base ['*']
    PropertyDecl property_decl() {
        PropertyDecl p;
        p.name = expect_ident("property name");
        expect(lex::Tok::Colon, "':'");
        if (accept(lex::Tok::LBracket)) {
            p.kind = PropKind::Optional;
            base_ref(p);
            expect(lex::Tok::RBracket, "']'");
            return p;
        }
        if (at_kw("set") || at_kw("seq")) {
            p.kind = take().text == "set" ? PropKind::Set : PropKind::Seq;
            expect(lex::Tok::LParen, "'('");
            base_ref(p);
            expect(lex::Tok::RParen, "')'");
            expect(lex::Tok::Star, "'*'");
            return p;
        }
        p.kind = PropKind::One;
        base_ref(p);
        if (accept(lex::Tok::Star)) p.kind = PropKind::Set;
        return p;
    }

    void base_ref(PropertyDecl& p) {
        if (!at(lex::Tok::Ident)) fail("expected a type");
        std::string head = take().text;
        if (head == "int") { p.target = Base::integer(); return; }
        if (head == "str" || head == "string") { p.target = Base::str(); return; }
        if (head == "bool") { p.target = Base::boolean(); return; }
        if (accept(lex::Tok::Dot)) {
            // association end: Class.prop
            std::string prop = expect_ident("opposite property name");
            p.target = Base::cls(head);
            p.opposite = IdenProperty{head, prop};
            return;
        }
        // class or value-set reference; disambiguated once the unit is parsed
        p.target = Base{Base::Kind::Class, head};
        p.opposite.reset();
    }

public:
    /// Class-vs-value-set disambiguation of bare type names, applied after the
    /// whole unit is parsed.
    static void fix_bases(BoosterModel& m) {
        for (auto& c : m.classes)
            for (auto& p : c.properties)
                if (p.target.kind == Base::Kind::Class && !p.opposite &&
                    m.find_value_set(p.target.name))
                    p.target.kind = Base::Kind::ValueSet;
    }

private:
    // -- substitutions ------------------------------------------------------
    // Precedence, loosest first:  ;   []   ==> (right-assoc), quantifiers   ||

    SubPtr substitution() { return seq_level(); }

    SubPtr seq_level() {
        SubPtr l = choice_level();
        while (accept(lex::Tok::Semi)) l = mk_sub<SeqC>(l, choice_level());
        return l;
    }

    SubPtr choice_level() {
        SubPtr l = guard_level();
        while (accept(lex::Tok::ChoiceBox)) l = mk_sub<Choice>(l, guard_level());
        return l;
    }

    SubPtr guard_level() {
        if (at_kw("skip")) { take(); return par_tail(mk_sub<Skip>()); }
        if (accept(lex::Tok::Bang)) return quantifier(true);
        if (accept(lex::Tok::At)) return quantifier(false);

        // Try an expression first; `==>` makes it a guard, `:=` an assignment.
        size_t save = i_;
        ExprPtr e;
        bool ok = true;
        try {
            e = expression();
        } catch (const ParseError&) {
            ok = false;
        }
        if (ok && accept(lex::Tok::GuardArrow))
            return par_tail(mk_sub<Guard>(e, guard_level()));
        if (ok && accept(lex::Tok::Assign)) {
            const auto* pe = std::get_if<PathExpr>(&e->v);
            if (!pe) fail("assignment target must be a path");
            return par_tail(mk_sub<Assign>(pe->path, expression()));
        }
        // Fall back: parenthesised substitution.
        i_ = save;
        if (accept(lex::Tok::LParen)) {
            SubPtr s = substitution();
            expect(lex::Tok::RParen, "')'");
            return par_tail(s);
        }
        fail("expected a substitution");
    }

    SubPtr quantifier(bool all) {
        std::string var = expect_ident("bound variable");
        expect(lex::Tok::Colon, "':'");
        ExprPtr range = expression();
        expect(lex::Tok::At, "'@'");
        SubPtr body = guard_level();
        SubPtr q = all ? mk_sub<All>(var, range, body) : mk_sub<Any>(var, range, body);
        return par_tail(q);
    }

    SubPtr par_tail(SubPtr l) {
        while (accept(lex::Tok::ParBar)) l = mk_sub<Par>(l, par_unit());
        return l;
    }

    // Right operand of ||: one atom-level substitution (no combinators).
    SubPtr par_unit() {
        if (at_kw("skip")) { take(); return mk_sub<Skip>(); }
        if (accept(lex::Tok::Bang)) return quantifier_unit(true);
        if (accept(lex::Tok::At)) return quantifier_unit(false);
        size_t save = i_;
        bool ok = true;
        ExprPtr e;
        try {
            e = expression();
        } catch (const ParseError&) {
            ok = false;
        }
        if (ok && accept(lex::Tok::GuardArrow)) {
            SubPtr body = par_unit();
            return mk_sub<Guard>(e, body);
        }
        if (ok && accept(lex::Tok::Assign)) {
            const auto* pe = std::get_if<PathExpr>(&e->v);
            if (!pe) fail("assignment target must be a path");
            return mk_sub<Assign>(pe->path, expression());
        }
        i_ = save;
        if (accept(lex::Tok::LParen)) {
            SubPtr s = substitution();
            expect(lex::Tok::RParen, "')'");
            return s;
        }
        fail("expected a substitution");
    }

    SubPtr quantifier_unit(bool all) {
        std::string var = expect_ident("bound variable");
        expect(lex::Tok::Colon, "':'");
        ExprPtr range = expression();
        expect(lex::Tok::At, "'@'");
        SubPtr body = par_unit();
        return all ? mk_sub<All>(var, range, body) : mk_sub<Any>(var, range, body);
    }

    // -- expressions --------------------------------------------------------

    ExprPtr expression() { return implies_level(); }

    ExprPtr implies_level() {
        ExprPtr l = or_level();
        if (accept(lex::Tok::Implies)) return mk_bin(BinOp::Implies, l, implies_level());
        return l;
    }
    ExprPtr or_level() {
        ExprPtr l = and_level();
        while (at_kw("or")) { take(); l = mk_bin(BinOp::Or, l, and_level()); }
        return l;
    }
    ExprPtr and_level() {
        ExprPtr l = cmp_level();
        while (accept(lex::Tok::Amp)) l = mk_bin(BinOp::And, l, cmp_level());
        return l;
    }
    ExprPtr cmp_level() {
        ExprPtr l = add_level();
        auto op = [&]() -> std::optional<BinOp> {
            switch (cur().kind) {
                case lex::Tok::Eq: return BinOp::Eq;
                case lex::Tok::Ne: return BinOp::Ne;
                case lex::Tok::Lt: return BinOp::Lt;
                case lex::Tok::Le: return BinOp::Le;
                case lex::Tok::Gt: return BinOp::Gt;
                case lex::Tok::Ge: return BinOp::Ge;
                case lex::Tok::Colon: return BinOp::In;
                default: return std::nullopt;
            }
        }();
        if (op) {
            take();
            return mk_bin(*op, l, add_level());
        }
        return l;
    }
    ExprPtr add_level() {
        ExprPtr l = mul_level();
        for (;;) {
            if (accept(lex::Tok::Plus)) l = mk_bin(BinOp::Add, l, mul_level());
            else if (accept(lex::Tok::Minus)) l = mk_bin(BinOp::Sub, l, mul_level());
            else if (accept(lex::Tok::Caret)) l = mk_expr<ConcatE>(l, mul_level());
            else if (accept(lex::Tok::Union)) l = mk_expr<UnionE>(l, mul_level());
            else return l;
        }
    }
    ExprPtr mul_level() {
        ExprPtr l = unary_level();
        while (accept(lex::Tok::Star)) l = mk_bin(BinOp::Mul, l, unary_level());
        return l;
    }
    ExprPtr unary_level() {
        if (accept(lex::Tok::Minus)) return mk_expr<Unary>(UnOp::Neg, unary_level());
        if (at_kw("not")) { take(); return mk_expr<Unary>(UnOp::Not, unary_level()); }
        if (at(lex::Tok::Ident) && cur().text == "card" && peek().kind == lex::Tok::LParen) {
            take(); take();
            ExprPtr e = expression();
            expect(lex::Tok::RParen, "')'");
            return mk_expr<Card>(e);
        }
        // `#s` and `card(s)` are the same node; card(...) is the canonical print.
        if (accept(lex::Tok::Hash)) return mk_expr<Card>(unary_level());
        return atom();
    }

    ExprPtr atom() {
        switch (cur().kind) {
            case lex::Tok::Int: return mk_int(take().value);
            case lex::Tok::Str: return mk_expr<StrLit>(take().text);
            case lex::Tok::LParen: {
                take();
                ExprPtr e = expression();
                expect(lex::Tok::RParen, "')'");
                return e;
            }
            case lex::Tok::Lt: { // sequence display; elements bind above comparisons
                take();
                std::vector<ExprPtr> xs;
                if (!at(lex::Tok::Gt)) {
                    xs.push_back(add_level());
                    while (accept(lex::Tok::Comma)) xs.push_back(add_level());
                }
                expect(lex::Tok::Gt, "'>'");
                return mk_expr<SeqDisplay>(std::move(xs));
            }
            case lex::Tok::LBrace: { // set display
                take();
                std::vector<ExprPtr> xs;
                if (!at(lex::Tok::RBrace)) {
                    xs.push_back(add_level());
                    while (accept(lex::Tok::Comma)) xs.push_back(add_level());
                }
                expect(lex::Tok::RBrace, "'}'");
                return mk_expr<SetDisplay>(std::move(xs));
            }
            case lex::Tok::DecIdent:
            case lex::Tok::Ident:
                break;
            default:
                fail("expected an expression");
        }
        if (at_kw("true")) { take(); return mk_bool(true); }
        if (at_kw("false")) { take(); return mk_bool(false); }
        if (at_kw("undefined")) { take(); return mk_expr<UndefinedE>(); }
        if (at_kw("ins")) {
            take();
            expect(lex::Tok::LParen, "'('");
            ExprPtr s = expression();
            expect(lex::Tok::Comma, "','");
            ExprPtr i = expression();
            expect(lex::Tok::Comma, "','");
            ExprPtr e = expression();
            expect(lex::Tok::RParen, "')'");
            return mk_expr<InsE>(s, i, e);
        }
        if (at_kw("extent")) {
            take();
            expect(lex::Tok::LParen, "'('");
            std::string c = expect_ident("class name");
            expect(lex::Tok::RParen, "')'");
            return mk_expr<ExtentE>(c);
        }
        if (at_kw("set") && peek().kind == lex::Tok::LParen) {
            take(); take();
            std::string s = expect_ident("value-set name");
            expect(lex::Tok::RParen, "')'");
            return mk_expr<SetOfE>(s);
        }
        return mk_path(path());
    }

    Path path() {
        BPath p;
        p.segments.push_back(path_seg());
        while (accept(lex::Tok::Dot)) p.segments.push_back(path_seg());
        return Path{std::move(p)};
    }

    BPathSeg path_seg() {
        BPathSeg seg;
        if (at(lex::Tok::DecIdent)) {
            std::string id = take().text;
            seg.decor = id.back() == '?' ? Decor::In : Decor::Out;
            seg.name = id.substr(0, id.size() - 1);
        } else {
            seg.name = expect_ident("path segment");
        }
        if (at(lex::Tok::LParen)) {
            take();
            seg.index = expression();
            expect(lex::Tok::RParen, "')'");
        }
        return seg;
    }
};

} // namespace detail

/// Parse a model unit. On success the result still needs validate_model;
/// unresolved names are deferred to validation.
inline BoosterModel parse_model(const SourceUnit& src) {
    detail::Parser p(src);
    std::string name = src.origin;
    if (auto slash = name.find_last_of("/\\"); slash != std::string::npos)
        name = name.substr(slash + 1);
    if (auto dot = name.find('.'); dot != std::string::npos) name = name.substr(0, dot);
    if (name.empty() || name == "<memory>") name = "model";
    BoosterModel m = p.model(name);
    p.fix_bases(m);
    return m;
}

/// Parse a single substitution program. `context` names the class the program
/// belongs to; parsing itself is context-free.
inline SubPtr parse_substitution(const SourceUnit& src, const std::string& context = {}) {
    (void)context;
    detail::Parser p(src);
    return p.substitution_only();
}

inline ExprPtr parse_expression(const SourceUnit& src) {
    detail::Parser p(src);
    return p.expression_only();
}

} // namespace boosql
