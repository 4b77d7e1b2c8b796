#include <catch2/catch.hpp>

#include "boosql/print.hpp"
#include "boosql/tables.hpp"
#include "test_util.hpp"

using namespace boosql;

namespace {
TypingEnv env_for(const std::string& cls) {
    TypingEnv env;
    static std::shared_ptr<const BoosterModel> m = test::load_hrs();
    env.model = m.get();
    env.ctx_class = cls;
    return env;
}

BPath bpath(std::initializer_list<const char*> names) {
    BPath p;
    for (const char* n : names) p.segments.push_back({n, Decor::None, nullptr});
    return p;
}
} // namespace

TEST_CASE("this.owner.reglist elaborates to the published object path") {
    TypingEnv env = env_for("Account");
    OPath got = resolve_bpath(env, bpath({"this", "owner", "reglist"}));

    OPath want;
    want.start = {RefStart::Kind::This, Base::cls("Account"), {}, nullptr, {}};
    want.targets = {{IdenProperty{"Account", "owner"}, false, nullptr},
                    {IdenProperty{"Traveller", "reglist"}, false, nullptr}};
    CHECK(equal(got, want));
}

TEST_CASE("bare this elaborates to the base reference") {
    TypingEnv env = env_for("Hotel");
    OPath got = resolve_bpath(env, bpath({"this"}));
    CHECK(got.targets.empty());
    CHECK(got.start.kind == RefStart::Kind::This);
    CHECK(got.start.base == Base::cls("Hotel"));
}

TEST_CASE("an unknown attribute names the class and the attribute") {
    TypingEnv env = env_for("Hotel");
    try {
        resolve_bpath(env, bpath({"this", "nosuch"}));
        FAIL("expected a resolution error");
    } catch (const ResolveError& e) {
        CHECK(e.class_name == "Hotel");
        CHECK(e.attribute == "nosuch");
    }
    // exhaustive scan of Hotel's declared properties confirms the verdict
    bool declared = false;
    for (const auto& p : env.model->find_class("Hotel")->properties)
        declared |= p.name == "nosuch";
    CHECK_FALSE(declared);
}

TEST_CASE("navigation through a non-class property is rejected") {
    TypingEnv env = env_for("Hotel");
    CHECK_THROWS_AS(resolve_bpath(env, bpath({"limit", "x"})), ResolveError);
}

TEST_CASE("indexing a non-seq property is rejected") {
    TypingEnv env = env_for("Hotel");
    BPath p = bpath({"allocations"});
    p.segments[0].index = mk_int(1);
    CHECK_THROWS_AS(resolve_bpath(env, p), ResolveError);
}

TEST_CASE("the reglist object path translates to two association accesses") {
    auto m = test::load_hrs();
    TypingEnv env = env_for("Account");
    OPath op = resolve_bpath(env, bpath({"this", "owner", "reglist"}));
    TPath got = obj_to_tab_path(*m, op);

    TPath want;
    want.start = {RefStart::Kind::This, Base::cls("Account"), {}, nullptr, {}};
    want.accesses = {{TAccessKind::AssocT, IdenProperty{"Account", "owner"}, nullptr},
                     {TAccessKind::AssocT, IdenProperty{"Traveller", "reglist"}, nullptr}};
    CHECK(equal(got, want));
}

TEST_CASE("the base case copies the start reference verbatim") {
    auto m = test::load_hrs();
    OPath op;
    op.start = {RefStart::Kind::This, Base::cls("Hotel"), {}, nullptr, {}};
    TPath got = obj_to_tab_path(*m, op);
    CHECK(got.accesses.empty());
    CHECK(equal(got.start, op.start));
}

TEST_CASE("r!.dates classifies as a set-table access") {
    auto m = test::load_hrs();
    TypingEnv env = env_for("Hotel");
    env.io["r!"] = {Base::cls("Reservation"), PropKind::One, true};
    BPath p;
    p.segments = {{"r", Decor::Out, nullptr}, {"dates", Decor::None, nullptr}};
    OPath op = resolve_bpath(env, p);
    TPath tp = obj_to_tab_path(*m, op);
    REQUIRE(tp.accesses.size() == 1);
    CHECK(tp.accesses[0].kind == TAccessKind::SetT);

    // cross-check against the table-mapper's reflective queries
    TableModel tm = derive_table_model(*m);
    ReflectiveQueries q = reflective_queries(tm);
    CHECK(q.setTables({"Reservation", "dates"}));
    CHECK_FALSE(q.biAssoc({"Reservation", "dates"}));
}

TEST_CASE("translation is total and preserves the property spine") {
    auto m = test::load_hrs();
    struct Case { const char* cls; std::vector<const char*> segs; };
    std::vector<Case> cases = {
        {"Account", {"this", "owner", "reglist"}},
        {"Account", {"owner"}},
        {"Hotel", {"reservations"}},
        {"Hotel", {"allocations"}},
        {"Room", {"hotel", "limit"}},
        {"Reservation", {"host", "registered"}},
        {"Reservation", {"status"}},
    };
    for (const auto& c : cases) {
        TypingEnv env = env_for(c.cls);
        BPath p;
        for (const char* s : c.segs) p.segments.push_back({s, Decor::None, nullptr});
        OPath op = resolve_bpath(env, p);
        TPath tp = obj_to_tab_path(*m, op);
        REQUIRE(tp.accesses.size() == op.targets.size());
        for (size_t i = 0; i < op.targets.size(); ++i)
            CHECK(tp.accesses[i].prop == op.targets[i].prop);
    }
}

TEST_CASE("the storage classification is a partition") {
    auto m = test::load_hrs();
    for (const auto& c : m->classes)
        for (const auto& p : c.properties) {
            StorageKind k = classify_property(*m, {c.name, p.name});
            int matches = 0;
            if (p.opposite) matches += (k == StorageKind::BiAssoc);
            else if (p.kind == PropKind::Set) matches += (k == StorageKind::SetTable);
            else if (p.kind == PropKind::Seq) matches += (k == StorageKind::SeqTable);
            else matches += (k == StorageKind::ClassColumn);
            CHECK(matches == 1);
        }
}

TEST_CASE("expression translation is homomorphic and stage-correct") {
    auto m = test::load_hrs();
    TypingEnv env = env_for("Hotel");

    ExprPtr card = resolve_expr(env, parse_expression({"card(allocations)"}));
    ExprPtr tab = obj_to_tab_expr(*m, card);
    const auto* cd = std::get_if<Card>(&tab->v);
    REQUIRE(cd);
    const auto* pe = std::get_if<PathExpr>(&cd->arg->v);
    REQUIRE(pe);
    const auto* tp = std::get_if<TPath>(&pe->path.v);
    REQUIRE(tp);
    CHECK(tp->accesses[0].kind == TAccessKind::AssocT);
    CHECK(stage_of(tab) == Stage::T);

    ExprPtr lit = obj_to_tab_expr(*m, mk_int(5));
    CHECK(equal(lit, mk_int(5)));

    // composing path translation over every harvested path gives the same tree
    ExprPtr sum = resolve_expr(env, parse_expression({"card(reservations) + 1"}));
    ExprPtr whole = obj_to_tab_expr(*m, sum);
    CHECK(stage_of(whole) == Stage::T);
}

TEST_CASE("bound variables may not shadow enclosing names") {
    auto m = test::load_hrs();
    TypingEnv env = env_for("Hotel");
    SubPtr bad = parse_substitution({"! limit : extent(Room) @ skip"});
    CHECK_THROWS_AS(resolve_substitution(env, bad), ResolveError);
    SubPtr ok = parse_substitution({"! v : extent(Room) @ skip"});
    CHECK_NOTHROW(resolve_substitution(env, ok));
}
