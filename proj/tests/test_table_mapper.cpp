#include <catch2/catch.hpp>

#include "boosql/tables.hpp"
#include "test_util.hpp"

using namespace boosql;

TEST_CASE("the room-reservation association yields one table with an index") {
    TableModel tm = derive_table_model(*test::load_hrs());
    const AssocTable* at = tm.assoc_for({"Room", "reservations"});
    REQUIRE(at);
    CHECK(at->name == "Room_reservations_Reservation_room");
    CHECK(at->has_index);
    const TableSpec* spec = tm.find_spec(at->name);
    REQUIRE(spec);
    std::vector<std::string> cols;
    for (const auto& c : spec->columns) cols.push_back(c.name);
    CHECK(cols == std::vector<std::string>{"oid", "reservations", "room", "index"});

    // both ends resolve to the same single table
    CHECK(tm.assoc_for({"Reservation", "room"}) == at);
}

TEST_CASE("a class with no properties still gets an oid-only table") {
    BoosterModel m = parse_model({"class A { }", "m"});
    TableModel tm = derive_table_model(m);
    const TableSpec* spec = tm.find_spec("A");
    REQUIRE(spec);
    REQUIRE(spec->columns.size() == 1);
    CHECK(spec->columns[0].name == "oid");
    CHECK(spec->columns[0].primary_key);
    CHECK(spec->columns[0].auto_increment);
}

TEST_CASE("set-valued primitives get their own element table") {
    TableModel tm = derive_table_model(*test::load_hrs());
    const ElementTable* et = tm.element_for({"Reservation", "dates"});
    REQUIRE(et);
    CHECK(et->name == "Reservation_dates");
    CHECK_FALSE(et->ordered);
    const TableSpec* spec = tm.find_spec("Reservation_dates");
    REQUIRE(spec);
    REQUIRE(spec->columns.size() == 2);
    CHECK(spec->columns[0].name == "oid");
    CHECK(spec->columns[1].name == "dates");
    CHECK(spec->columns[1].type == "CHAR(30)");
}

TEST_CASE("reflective queries partition the declared properties") {
    TableModel tm = derive_table_model(*test::load_hrs());
    ReflectiveQueries q = reflective_queries(tm);
    CHECK(q.biAssoc({"Hotel", "reservations"}));
    CHECK(q.classTables({"Reservation", "status"}));
    CHECK(q.setTables({"Reservation", "dates"}));
    for (const auto& c : tm.source.classes)
        for (const auto& p : c.properties) {
            IdenProperty ip{c.name, p.name};
            int hits = q.biAssoc(ip) + q.classTables(ip) + q.setTables(ip) + q.seqTables(ip);
            CHECK(hits == 1);
        }
}

TEST_CASE("the golden DDL lines are reproduced") {
    TableModel tm = derive_table_model(*test::load_hrs());
    std::string ddl;
    for (const auto& s : emit_ddl(tm)) ddl += s + "\n";
    CHECK(ddl.find("CREATE TABLE `Reservation`(`oid` INTEGER AUTO_INCREMENT, "
                   "PRIMARY KEY (`oid`), `status` CHAR(30));") != std::string::npos);
    CHECK(ddl.find("CREATE TABLE `Room_reservations_Reservation_room`(`oid` INTEGER "
                   "AUTO_INCREMENT, PRIMARY KEY (`oid`), `reservations` INTEGER, "
                   "`room` INTEGER, `index` INTEGER);") != std::string::npos);
}

TEST_CASE("an empty model emits no DDL") {
    BoosterModel m;
    CHECK(emit_ddl(derive_table_model(m)).empty());
}

TEST_CASE("one set-valued property means exactly two statements") {
    BoosterModel m = parse_model({"set Col { a, b }\nclass A { attributes ds : set(Col) * }",
                                  "m"});
    CHECK(emit_ddl(derive_table_model(m)).size() == 2);
}

TEST_CASE("association tables are independent of declaration order") {
    const char* fwd = R"(
class A { attributes bs : seq(B.ao) * }
class B { attributes ao : [A.bs] }
)";
    const char* rev = R"(
class B { attributes ao : [A.bs] }
class A { attributes bs : seq(B.ao) * }
)";
    TableModel t1 = derive_table_model(parse_model({fwd, "f"}));
    TableModel t2 = derive_table_model(parse_model({rev, "r"}));
    REQUIRE(t1.assoc_tables.size() == 1);
    REQUIRE(t2.assoc_tables.size() == 1);
    CHECK(t1.assoc_tables[0].name == t2.assoc_tables[0].name);
    CHECK(t1.assoc_tables[0].name == "A_bs_B_ao");
    std::vector<std::string> d1 = emit_ddl(t1), d2 = emit_ddl(t2);
    CHECK(d1 == d2);
}

TEST_CASE("column counts are conserved") {
    auto m = test::load_hrs();
    TableModel tm = derive_table_model(*m);
    int stored_roles = 0;
    for (const auto& c : m->classes)
        for (const auto& p : c.properties) {
            switch (classify_property(*m, {c.name, p.name})) {
                case StorageKind::ClassColumn:
                case StorageKind::SetTable:
                case StorageKind::SeqTable:
                    stored_roles += 1;
                    break;
                case StorageKind::BiAssoc:
                    stored_roles += 1; // each end contributes one column
                    break;
            }
        }
    int columns = 0;
    for (const auto& [name, spec] : tm.all_specs)
        for (const auto& col : spec.columns)
            if (col.name != "oid" && col.name != "index") columns++;
    CHECK(columns == stored_roles);
}

TEST_CASE("integrity constraints cover the single-valued and ordered ends") {
    TableModel tm = derive_table_model(*test::load_hrs());
    std::string ddl;
    for (const auto& s : emit_ddl(tm)) ddl += s + "\n";
    // Reservation.room is optional: each reservation joins at most one row
    CHECK(ddl.find("ALTER TABLE `Room_reservations_Reservation_room` ADD UNIQUE "
                   "(`reservations`);") != std::string::npos);
    // Room.reservations is ordered: positions are unique per room
    CHECK(ddl.find("ALTER TABLE `Room_reservations_Reservation_room` ADD UNIQUE "
                   "(`room`, `index`);") != std::string::npos);
}
