#include <catch2/catch.hpp>

#include "boosql/sql.hpp"
#include "sql_mini_parser.hpp"
#include "test_util.hpp"

using namespace boosql;
using namespace boosql::sql;

TEST_CASE("the empty insert prints exactly as published") {
    Stmts s{{Insert{"Reservation", {}, {}}}};
    CHECK(emit_sql_text(s) == "INSERT INTO `Reservation` () VALUE ();\n");
}

TEST_CASE("an empty statement list emits empty text") {
    CHECK(emit_sql_text(Stmts{}).empty());
}

TEST_CASE("the pattern-23 update matches the golden row") {
    // UPDATE t SET index = index + 1 WHERE ao = this AND index >= i
    Update up;
    up.table = "t";
    up.sets = {{"index", bin(SqlBinOp::Add, name("index"), lit(1))}};
    up.where = bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("ao"), name("this")),
                   bin(SqlBinOp::Ge, name("index"), name("i")));
    std::string text = emit_sql_text(Stmts{{up}});
    CHECK(test::normalize_sql(text) ==
          "UPDATE t SET index = index + 1 WHERE ao = this AND index >= i;");
}

TEST_CASE("statements are semicolon-terminated, one per line") {
    Stmts s{{DropTempTable{"m?.reservations"}},
            {SetVar{"r!", mk<LastInsertId>()}}};
    CHECK(emit_sql_text(s) ==
          "DROP TEMPORARY TABLE IF EXISTS `m?.reservations`;\n"
          "SET `r!` = last_insert_id ();\n");
}

TEST_CASE("emit then mini-parse is the identity on statements") {
    SelectExpr cache;
    cache.proj = {Projection::Kind::Col, "reservations"};
    cache.from = {FromClause::Kind::Table, "Room_reservations_Reservation_room", nullptr, {}};
    cache.where = bin(SqlBinOp::Eq, name("room"), name("m?"));

    SelectExpr counted;
    counted.proj = {Projection::Kind::CountCol, "oid"};
    counted.from = {FromClause::Kind::Sub, {}, std::make_shared<const SelectExpr>(cache),
                    "reservations"};
    counted.where = truth();

    Stmts original;
    original.push_back({CreateTempTableAs{"m?.reservations", cache}});
    original.push_back({DeclareVar{"x", "Date"}});
    original.push_back({DeclareCursor{"x_cursor", cache}});
    original.push_back({OpenCursor{"x_cursor"}});
    original.push_back({FetchInto{"x_cursor", "x"}});
    original.push_back(
        {SelectInto{{Projection::Kind::CountStar, {}}, "x_variant",
                    {FromClause::Kind::Table, "dates?", nullptr, {}}, truth()}});
    Stmts loop;
    loop.push_back({Insert{"Reservation_dates", {"oid", "dates"}, {name("r!"), name("x")}}});
    loop.push_back({SetVar{"x_variant", bin(SqlBinOp::Sub, name("x_variant"), lit(1))}});
    original.push_back(while_stmt(bin(SqlBinOp::Gt, name("x_variant"), lit(0)), loop));
    original.push_back(if_stmt(bin(SqlBinOp::Gt, mk<SelectExpr>(counted), lit(0)),
                               {{Signal{"boom"}}}, {{CloseCursor{"x_cursor"}}}));

    std::string text = emit_sql_text(original);
    Stmts reparsed = test::parse_statements_text(text);
    CHECK(equal(original, reparsed));
}

TEST_CASE("emit then mini-parse is the identity on a whole procedure") {
    SqlProcedure p;
    p.name = "A_op";
    p.in_params = {{"this?", "INTEGER"}, {"k?", "CHAR(30)"}};
    p.out_params = {{"r!", "INTEGER"}};
    p.body.push_back({Insert{"A", {}, {}}});
    p.body.push_back({SetVar{"r!", mk<LastInsertId>()}});
    p.body.push_back({Update{"A",
                             {{"n", bin(SqlBinOp::Mul, name("n"), lit(2))}},
                             bin(SqlBinOp::Eq, name("oid"), name("this?"))}});
    std::string text = emit_sql_text(p);
    SqlProcedure q = test::parse_procedure_text(text);
    CHECK(equal(p, q));
}
