#include <catch2/catch.hpp>

#include "boosql/eval_sql.hpp"
#include "boosql/verify.hpp"
#include "test_util.hpp"

using namespace boosql;
using namespace boosql::sql;

namespace {
TableModel hrs_tables() { return derive_table_model(*test::load_hrs()); }

DbState one_reservation() {
    DbState db = DbState::from_schema(hrs_tables());
    Tuple row;
    row.values["oid"] = ScalarValue::integer(1);
    row.values["status"] = ScalarValue::null();
    db.tables.at("Reservation").rows.push_back(row);
    db.tables.at("Reservation").auto_increment = 1;
    return db;
}
} // namespace

TEST_CASE("update rewrites exactly the matching tuples") {
    DbState db = one_reservation();
    SqlIo io;
    io.vars["r!"] = ScalarValue::integer(1);
    Update up{"Reservation",
              {{"status", str("unconfirmed")}},
              bin(SqlBinOp::Eq, name("oid"), name("r!"))};
    auto [db2, io2] = eval_sql_stmt(db, io, {up});
    CHECK(db2.tables.at("Reservation").rows[0].values.at("status") ==
          ScalarValue::string("unconfirmed"));
    CHECK_FALSE(db == db2);
}

TEST_CASE("a false conditional leaves the state unchanged") {
    DbState db = one_reservation();
    SqlIo io;
    SqlStatement st = if_stmt(truth(false),
                              {{Update{"Reservation", {{"status", str("x")}}, truth()}}});
    auto [db2, io2] = eval_sql_stmt(db, io, st);
    CHECK(db == db2);
}

TEST_CASE("insert assigns auto-increment ids and last_insert_id sees them") {
    DbState db = DbState::from_schema(hrs_tables());
    SqlIo io;
    auto [db2, io2] = eval_sql_stmt(db, io, {Insert{"Reservation", {}, {}}});
    auto [db3, io3] = eval_sql_stmt(db2, io2, {SetVar{"r!", mk<LastInsertId>()}});
    CHECK(io3.vars.at("r!") == ScalarValue::integer(1));
    auto [db4, io4] = eval_sql_stmt(db3, io3, {Insert{"Reservation", {}, {}}});
    CHECK(db4.last_insert_id == 2);
    CHECK(db4.tables.at("Reservation").rows.size() == 2);
}

TEST_CASE("select into binds null on an empty result") {
    DbState db = DbState::from_schema(hrs_tables());
    SqlIo io;
    SelectInto si{{Projection::Kind::Col, "status"},
                  "r!.status",
                  {FromClause::Kind::Table, "Reservation", nullptr, {}},
                  truth()};
    auto [db2, io2] = eval_sql_stmt(db, io, {si});
    CHECK(io2.vars.at("r!.status").is_null());
}

TEST_CASE("execution is deterministic") {
    DbState db = one_reservation();
    SqlIo io;
    io.vars["r!"] = ScalarValue::integer(1);
    Update up{"Reservation",
              {{"status", str("unconfirmed")}},
              bin(SqlBinOp::Eq, name("oid"), name("r!"))};
    auto a = eval_sql_stmt(db, io, {up});
    auto b = eval_sql_stmt(db, io, {up});
    CHECK(a.first == b.first);
}

TEST_CASE("a loop that never decreases its variant exhausts its fuel") {
    DbState db = DbState::from_schema(hrs_tables());
    SqlIo io;
    io.vars["v"] = ScalarValue::integer(3);
    SqlStatement bad = while_stmt(bin(SqlBinOp::Gt, name("v"), lit(0)),
                                  {{SetVar{"v", name("v")}}});
    try {
        eval_sql_stmt(db, io, bad);
        FAIL("expected fuel exhaustion");
    } catch (const SqlError& e) {
        CHECK(e.kind == SqlError::Kind::FuelExhausted);
    }
}

TEST_CASE("generated loops run exactly variant-many iterations") {
    DbState db = DbState::from_schema(hrs_tables());
    SqlIo io;
    io.vars["v"] = ScalarValue::integer(4);
    io.vars["hits"] = ScalarValue::integer(0);
    SqlStatement loop = while_stmt(
        bin(SqlBinOp::Gt, name("v"), lit(0)),
        {{SetVar{"hits", bin(SqlBinOp::Add, name("hits"), lit(1))}},
         {SetVar{"v", bin(SqlBinOp::Sub, name("v"), lit(1))}}});
    auto [db2, io2] = eval_sql_stmt(db, io, loop);
    CHECK(io2.vars.at("hits") == ScalarValue::integer(4));
}

TEST_CASE("primary key uniqueness is enforced after every statement") {
    DbState db = one_reservation();
    db.tables.at("Reservation").rows[0].values["status"] = ScalarValue::string("x");
    SqlIo io;
    // same key, different row (an identical row would merge, set-of-tuples)
    Insert dup{"Reservation", {"oid", "status"}, {lit(1), str("y")}};
    CHECK_THROWS_AS(eval_sql_stmt(db, io, {dup}), SqlError);
}

TEST_CASE("the pattern-23 pair matches a brute-force insertion oracle") {
    // small instance here; the acceptance suite sweeps lengths up to five
    BoosterModel m = parse_model({R"(
class A { attributes bs : seq(B.ao) * }
class B { attributes ao : [A.bs] }
)", "p23"});
    TableModel tm = derive_table_model(m);

    for (int len = 0; len <= 3; ++len) {
        for (int pos = 1; pos <= len + 1; ++pos) {
            auto model = std::make_shared<const BoosterModel>(m);
            ObjState s = ObjState::empty(model);
            int owner = s.allocate("A");
            std::vector<Value> seq;
            for (int i = 0; i < len; ++i) {
                int b = s.allocate("B");
                seq.push_back(Value::ref(b));
                s.put("B", b, "ao", Value::ref(owner));
            }
            s.put("A", owner, "bs", Value::seq(seq));
            int fresh = s.allocate("B");
            DbState db = encode_db_state(s, tm);

            // the two statements of the pattern, with literal arguments
            Update shift{"A_bs_B_ao",
                         {{"index", bin(SqlBinOp::Add, name("index"), lit(1))}},
                         bin(SqlBinOp::And, bin(SqlBinOp::Eq, name("ao"), lit(owner)),
                             bin(SqlBinOp::Ge, name("index"), lit(pos)))};
            Insert insert{"A_bs_B_ao",
                          {"bs", "ao", "index"},
                          {lit(fresh), lit(owner), lit(pos)}};
            SqlIo io;
            auto [db2, io2] = eval_sql_stmt(db, io, {shift});
            auto [db3, io3] = eval_sql_stmt(db2, io2, {insert});

            // oracle: plain sequence insertion mapped through table_mappings
            std::vector<Value> expect = seq;
            expect.insert(expect.begin() + (pos - 1), Value::ref(fresh));
            ObjState s2 = s;
            s2.put("A", owner, "bs", Value::seq(expect));
            s2.put("B", fresh, "ao", Value::ref(owner));

            IndexedSet want = property_mappings_indexed(s2, {"A", "bs"});
            IndexedSet got = table_mappings_indexed(db3, "A_bs_B_ao", "ao", "bs");
            CHECK(want == got);
        }
    }
}

TEST_CASE("table inputs become one-column temp tables for the call") {
    SqlProcedure p;
    p.name = "A_op";
    p.in_params = {{"this?", "INTEGER"}, {"xs?", "CHAR(30)"}};
    p.out_params = {{"n!", "INTEGER"}};
    p.body.push_back({SelectInto{{Projection::Kind::CountStar, {}},
                                 "n!",
                                 {FromClause::Kind::Table, "xs?", nullptr, {}},
                                 truth()}});
    DbState db = DbState::from_schema(hrs_tables());
    std::map<std::string, ScalarValue> ins{{"this?", ScalarValue::integer(1)}};
    std::map<std::string, TableInput> tins;
    tins["xs?"] = {"value", {ScalarValue::string("a"), ScalarValue::string("b")}};
    auto [db2, out] = eval_sql_proc(db, ins, tins, p);
    CHECK(out.vars.at("n!") == ScalarValue::integer(2));
    CHECK(db2.temps.empty()); // dropped at exit
    CHECK(db == db2);
}

TEST_CASE("missing in-parameters are reported") {
    SqlProcedure p;
    p.name = "A_op";
    p.in_params = {{"this?", "INTEGER"}};
    DbState db = DbState::from_schema(hrs_tables());
    CHECK_THROWS_AS(eval_sql_proc(db, {}, {}, p), SqlError);
}
