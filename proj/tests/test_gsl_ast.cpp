#include <catch2/catch.hpp>

#include <functional>

#include "boosql/print.hpp"
#include "boosql/resolve.hpp"
#include "test_util.hpp"

using namespace boosql;

namespace {
const SubPtr& reserve_body() {
    static SubPtr body = test::load_hrs()->find_class("Hotel")->find_operation("reserve")->body;
    return body;
}

// independent recursive walker, kept apart from fold_substitution
int walk_count(const Substitution& s) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Skip> || std::is_same_v<T, Assign>) return 1;
            else if constexpr (std::is_same_v<T, Guard>) return 2 + walk_count(*n.body);
            else if constexpr (std::is_same_v<T, Par> || std::is_same_v<T, SeqC> ||
                               std::is_same_v<T, Choice>)
                return 1 + walk_count(*n.lhs) + walk_count(*n.rhs);
            else return 1 + walk_count(*n.body);
        },
        s.v);
}
} // namespace

TEST_CASE("node count of skip is one") {
    CHECK(count_nodes(*mk_sub<Skip>()) == 1);
}

TEST_CASE("node count of the reserve body is thirteen") {
    // 1 guard + 1 predicate subtree + 5 Par + 6 Assign
    CHECK(count_nodes(*reserve_body()) == 13);
    CHECK(walk_count(*reserve_body()) == 13);
}

TEST_CASE("assignment targets of reserve") {
    std::vector<std::string> got;
    for (const auto& t : assignment_targets(*reserve_body())) got.push_back(print_path(t));
    std::vector<std::string> want{"r!.dates", "r!.status", "r!.host",
                                  "reservations", "r!.room", "m?.reservations"};
    CHECK(got == want);
}

TEST_CASE("the identity algebra reconstructs the tree") {
    SubPtr rebuilt = fold_substitution<SubPtr>(*reserve_body(), RebuildAlgebra{});
    CHECK(equal(rebuilt, reserve_body()));
}

TEST_CASE("stage discipline is decidable and rejects mixtures") {
    auto m = test::load_hrs();
    CHECK(stage_of(*reserve_body()) == Stage::B);

    ResolvedOp r = resolve_operation(*m, "Hotel", "reserve");
    CHECK(stage_of(*r.body) == Stage::O);

    SubPtr t = obj_to_tab_substitution(*m, r.body);
    CHECK(stage_of(*t) == Stage::T);

    // gluing an O-staged body under a B-staged assignment is mixed
    const auto* g = std::get_if<Guard>(&r.body->v);
    REQUIRE(g);
    SubPtr mixed = mk_sub<Par>(reserve_body(), g->body);
    CHECK(stage_of(*mixed) == Stage::Mixed);
}

TEST_CASE("skip has no stage") {
    CHECK(stage_of(*mk_sub<Skip>()) == Stage::None);
}
