#include <catch2/catch.hpp>

#include "boosql/parse.hpp"
#include "boosql/print.hpp"
#include "test_util.hpp"

using namespace boosql;

TEST_CASE("the two-class fragment parses to a seq-to-one association") {
    BoosterModel m = parse_model({R"(
class Hotel {
  attributes
    reservations : seq(Reservation.host) *
}
class Reservation {
  attributes
    host : Hotel.reservations
}
)", "fragment"});
    REQUIRE(m.classes.size() == 2);
    const PropertyDecl* r = m.find_property("Hotel", "reservations");
    REQUIRE(r);
    CHECK(r->kind == PropKind::Seq);
    REQUIRE(r->opposite);
    CHECK(r->opposite->prop == "host");
    const PropertyDecl* h = m.find_property("Reservation", "host");
    REQUIRE(h);
    CHECK(h->kind == PropKind::One);
    CHECK(validate_model(m).empty());
}

TEST_CASE("empty input gives a model with zero classes") {
    BoosterModel m = parse_model({"", "empty"});
    CHECK(m.classes.empty());
}

TEST_CASE("a missing attribute type is a syntax error") {
    CHECK_THROWS_AS(parse_model({"class A { attributes x : }", "bad"}), ParseError);
}

TEST_CASE("the reserve body is a guard over a six-way parallel composition") {
    auto m = test::load_hrs();
    const auto* op = m->find_class("Hotel")->find_operation("reserve");
    REQUIRE(op);
    const auto* g = std::get_if<Guard>(&op->body->v);
    REQUIRE(g);
    // count parallel leaves
    int leaves = 0;
    std::function<void(const SubPtr&)> walk = [&](const SubPtr& s) {
        if (const auto* p = std::get_if<Par>(&s->v)) {
            walk(p->lhs);
            walk(p->rhs);
        } else {
            leaves++;
        }
    };
    walk(g->body);
    CHECK(leaves == 6);
}

TEST_CASE("skip parses to the skip node") {
    SubPtr s = parse_substitution({"skip"});
    CHECK(std::holds_alternative<Skip>(s->v));
}

TEST_CASE("parallel assignments parse to the expected tree shape") {
    SubPtr s = parse_substitution({"x := 1 || x := 2"});
    BPath px{{BPathSeg{"x", Decor::None, nullptr}}};
    SubPtr expected = mk_sub<Par>(mk_sub<Assign>(Path{px}, mk_int(1)),
                                  mk_sub<Assign>(Path{px}, mk_int(2)));
    CHECK(equal(s, expected));
}

TEST_CASE("#s and card(s) are one node") {
    ExprPtr a = parse_expression({"#reservations + 1"});
    ExprPtr b = parse_expression({"card(reservations) + 1"});
    CHECK(equal(a, b));
}

TEST_CASE("guard binds looser than parallel and tighter than choice") {
    // g ==> a || b  must be  g ==> (a || b)
    SubPtr s = parse_substitution({"x = 1 ==> y := 1 || z := 2"});
    const auto* g = std::get_if<Guard>(&s->v);
    REQUIRE(g);
    CHECK(std::holds_alternative<Par>(g->body->v));

    // (g1 ==> S1) [] (g2 ==> S2) parses without parentheses
    SubPtr c = parse_substitution({"x = 1 ==> y := 1 [] x = 2 ==> y := 2"});
    const auto* ch = std::get_if<Choice>(&c->v);
    REQUIRE(ch);
    CHECK(std::holds_alternative<Guard>(ch->lhs->v));
    CHECK(std::holds_alternative<Guard>(ch->rhs->v));
}

TEST_CASE("sequence display and decorations parse") {
    SubPtr s = parse_substitution({"qs := qs ^ < r!, 2 >"});
    const auto* a = std::get_if<Assign>(&s->v);
    REQUIRE(a);
    const auto* cat = std::get_if<ConcatE>(&a->source->v);
    REQUIRE(cat);
    const auto* disp = std::get_if<SeqDisplay>(&cat->rhs->v);
    REQUIRE(disp);
    REQUIRE(disp->elems.size() == 2);
    const auto* pe = std::get_if<PathExpr>(&disp->elems[0]->v);
    REQUIRE(pe);
    CHECK(std::get<BPath>(pe->path.v).segments[0].decor == Decor::Out);
}

TEST_CASE("both guard arrows are accepted") {
    SubPtr a = parse_substitution({"x = 1 ==> skip"});
    SubPtr b = parse_substitution({"x = 1 --> skip"});
    CHECK(equal(a, b));
}

TEST_CASE("print then parse is the identity on the model and its operations") {
    auto m = test::load_hrs();
    std::string printed = print_model(*m);
    BoosterModel again = parse_model({printed, "reprint"});
    REQUIRE(again.classes.size() == m->classes.size());
    for (const auto& c : m->classes) {
        const ClassDecl* c2 = again.find_class(c.name);
        REQUIRE(c2);
        CHECK(c2->properties.size() == c.properties.size());
        for (const auto& op : c.operations) {
            const OperationDecl* op2 = c2->find_operation(op.name);
            REQUIRE(op2);
            CHECK(equal(op.body, op2->body));
        }
    }
}

TEST_CASE("parsing never diverges and reports locations") {
    try {
        parse_substitution({"x := (1 + "});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.loc.line >= 1);
    }
}
