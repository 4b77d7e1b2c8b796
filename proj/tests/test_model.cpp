#include <catch2/catch.hpp>

#include "boosql/model.hpp"
#include "test_util.hpp"

using namespace boosql;

TEST_CASE("the hotel reservation model validates cleanly") {
    auto m = test::load_hrs();
    CHECK(validate_model(*m).empty());
    CHECK(m->classes.size() == 5);
    const PropertyDecl* host = m->find_property("Reservation", "host");
    REQUIRE(host);
    CHECK(host->kind == PropKind::One);
    REQUIRE(host->opposite);
    CHECK(host->opposite->cls == "Hotel");
    CHECK(host->opposite->prop == "reservations");
}

TEST_CASE("an empty model is vacuously valid") {
    BoosterModel m;
    CHECK(validate_model(m).empty());
}

TEST_CASE("asymmetric opposition is diagnosed") {
    // A.p opposes B.q but B.q opposes A.r
    BoosterModel m;
    ClassDecl a{"A",
                {PropertyDecl{"p", PropKind::Optional, Base::cls("B"), IdenProperty{"B", "q"}},
                 PropertyDecl{"r", PropKind::Optional, Base::cls("B"), IdenProperty{"B", "q"}}},
                {}};
    ClassDecl b{"B",
                {PropertyDecl{"q", PropKind::Optional, Base::cls("A"), IdenProperty{"A", "r"}}},
                {}};
    m.classes = {a, b};
    auto diags = validate_model(m);
    REQUIRE_FALSE(diags.empty());

    // independent pairwise scan of declared opposites confirms the finding
    int asymmetric = 0;
    for (const auto& c : m.classes)
        for (const auto& p : c.properties) {
            if (!p.opposite) continue;
            const PropertyDecl* q = m.find_property(p.opposite->cls, p.opposite->prop);
            if (!q || !q->opposite || !(q->opposite->cls == c.name) ||
                !(q->opposite->prop == p.name))
                asymmetric++;
        }
    CHECK(asymmetric > 0);
    bool reported = false;
    for (const auto& d : diags) reported |= d.where == "A.p";
    CHECK(reported);
}

TEST_CASE("opposition restricted to association ends is an involution") {
    auto m = test::load_hrs();
    for (const auto& c : m->classes)
        for (const auto& p : c.properties) {
            if (!p.opposite) continue;
            const PropertyDecl* q = m->find_property(p.opposite->cls, p.opposite->prop);
            REQUIRE(q);
            REQUIRE(q->opposite);
            CHECK(q->opposite->cls == c.name);
            CHECK(q->opposite->prop == p.name);
        }
}

TEST_CASE("validation is pure and repeatable") {
    auto m = test::load_hrs();
    auto d1 = validate_model(*m);
    auto d2 = validate_model(*m);
    CHECK(d1.size() == d2.size());
}

TEST_CASE("seq-seq bidirectional associations are rejected") {
    BoosterModel m;
    ClassDecl a{"A",
                {PropertyDecl{"ps", PropKind::Seq, Base::cls("B"), IdenProperty{"B", "qs"}}},
                {}};
    ClassDecl b{"B",
                {PropertyDecl{"qs", PropKind::Seq, Base::cls("A"), IdenProperty{"A", "ps"}}},
                {}};
    m.classes = {a, b};
    CHECK_FALSE(validate_model(m).empty());
}

TEST_CASE("duplicate property names are diagnosed") {
    BoosterModel m;
    ClassDecl a{"A",
                {PropertyDecl{"x", PropKind::One, Base::integer(), {}},
                 PropertyDecl{"x", PropKind::One, Base::str(), {}}},
                {}};
    m.classes = {a};
    CHECK_FALSE(validate_model(m).empty());
}
