// Command-line front end: compile models to SQL, emit schemas, run operations
// against state fixtures, and drive the differential verifier.
//
// Exit codes: 0 ok, 1 violation or pipeline diagnostic, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "boosql/generate.hpp"
#include "boosql/print.hpp"

namespace fs = std::filesystem;
using namespace boosql;

namespace {

int usage(const std::string& msg = {}) {
    if (!msg.empty()) std::cerr << "error: " << msg << "\n\n";
    std::cerr <<
        "usage: boosql <command> [options]\n"
        "\n"
        "commands:\n"
        "  compile <model.boo>      generate DDL and stored procedures\n"
        "      --out-dir DIR        write schema.sql and procedures.sql into DIR\n"
        "      --guard-mode MODE    skip (default) or signal\n"
        "  emit-schema <model.boo>  generate DDL only\n"
        "      --out FILE           write to FILE instead of stdout\n"
        "  interpret <model.boo>    evaluate one operation on a state fixture\n"
        "      --op Class.op        operation to run (required)\n"
        "      --state FILE         object-state fixture (required)\n"
        "      --input 'n = v'      bind an input (repeatable; this = #k included)\n"
        "      --io FILE            read bindings from a file instead\n"
        "  verify                   differential check of generated cases\n"
        "      --seed N             first seed (default 0)\n"
        "      --cases N            number of cases (default 1000)\n"
        "      --guard-mode MODE    skip (default) or signal\n"
        "      --mutation NAME      inject a backend defect (testing aid):\n"
        "                           drop-index-shift | swap-insert-update |\n"
        "                           skip-opposite-write | off-by-one-variant |\n"
        "                           omit-cache-refresh\n"
        "      --report-dir DIR     write violation reports into DIR\n"
        "      --verbose            per-template and per-cell coverage\n";
    return 2;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct Args {
    std::vector<std::string> positional;
    std::map<std::string, std::string> flags;
    std::vector<std::string> inputs; // repeatable --input
    bool verbose = false;
};

bool parse_args(int argc, char** argv, Args& out, std::string& err) {
    for (int i = 2; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--verbose") {
            out.verbose = true;
        } else if (a.rfind("--", 0) == 0) {
            if (i + 1 >= argc) {
                err = "flag " + a + " needs a value";
                return false;
            }
            std::string v = argv[++i];
            if (a == "--input") out.inputs.push_back(v);
            else out.flags[a.substr(2)] = v;
        } else {
            out.positional.push_back(a);
        }
    }
    return true;
}

GuardMode guard_mode_of(const Args& args, std::string& err) {
    auto it = args.flags.find("guard-mode");
    if (it == args.flags.end() || it->second == "skip") return GuardMode::Skip;
    if (it->second == "signal") return GuardMode::Signal;
    err = "unknown guard mode '" + it->second + "'";
    return GuardMode::Skip;
}

BoosterModel load_model(const std::string& path) {
    BoosterModel m = parse_model({read_file(path), path});
    auto diags = validate_model(m);
    if (!diags.empty()) {
        for (const auto& d : diags)
            std::cerr << "model: " << d.where << ": " << d.message << "\n";
        throw std::runtime_error("model validation failed");
    }
    return m;
}

// the built-in fixture suite run by `verify`: the hotel reservation example
// on its canonical state, plus the guard-blocked variant
const char* kHrsModel = R"(
set Date { d1, d2, d3, d4, d5 }
class Hotel {
  attributes
    limit : int
    reservations : seq(Reservation.host) *
    allocations : set(Room.hotel) *
    registered : set(Traveller.reglist) *
  operations
    reserve {
      r! : extent(Reservation) & dates? : set(Date) & m? : extent(Room)
        & card(allocations) < limit
      ==>
         r!.dates := r!.dates \/ dates? || r!.status := "unconfirmed"
      || r!.host := this || reservations := ins(reservations, #reservations + 1, r!)
      || r!.room := m?   || m?.reservations := ins(m?.reservations, #m?.reservations + 1, r!)
    }
}
class Reservation {
  attributes
    host : Hotel.reservations
    room : [Room.reservations]
    status : str
    dates : set(Date) *
}
class Room {
  attributes
    hotel : Hotel.allocations
    reservations : seq(Reservation.room) *
}
class Account {
  attributes
    owner : Traveller.account
    balance : int
}
class Traveller {
  attributes
    account : [Account.owner]
    reglist : seq(Hotel.registered) *
}
)";

int run_fixture_suite(CompileOptions options, int& failures) {
    auto model = std::make_shared<const BoosterModel>(
        parse_model({kHrsModel, "hrs"}));
    ObjState s = parse_obj_state(model, R"(
extent Hotel 1
extent Room 1
Hotel 1 limit = 2
Hotel 1 allocations = { #1 }
Room 1 hotel = #1
)");
    IoMap io{{"this", Value::ref(1)},
             {"dates?", Value::set({Value::enum_v("Date", "d1")})},
             {"m?", Value::ref(1)}};
    int ran = 0;
    auto check = [&](const ObjState& st, const char* what) {
        auto outcome = check_simulation(*model, "Hotel", "reserve", st, io, options);
        ran++;
        if (outcome.verdict.kind != Verdict::Kind::Simulated) {
            failures++;
            std::cerr << "fixture " << what << ": " << outcome.verdict.detail << "\n";
        }
    };
    check(s, "reserve");
    ObjState blocked = s;
    blocked.put("Hotel", 1, "limit", Value::integer(1));
    check(blocked, "reserve (guard blocked)");
    return ran;
}

int cmd_compile(const Args& args, bool schema_only) {
    if (args.positional.empty()) return usage("missing model path");
    std::string err;
    CompileOptions options;
    options.guard_mode = guard_mode_of(args, err);
    if (!err.empty()) return usage(err);

    BoosterModel m = load_model(args.positional[0]);
    TableModel tm = derive_table_model(m);

    std::ostringstream ddl;
    for (const auto& stmt : emit_ddl(tm)) ddl << stmt << "\n";

    std::ostringstream procs;
    for (const auto& c : m.classes)
        for (const auto& op : c.operations) {
            GenResult g = gen_procedure(m, tm, c.name, op.name, options);
            procs << sql::emit_sql_text(g.proc) << "\n";
        }

    if (schema_only) {
        auto it = args.flags.find("out");
        if (it == args.flags.end()) {
            std::cout << ddl.str();
        } else {
            std::ofstream f(it->second);
            f << ddl.str();
        }
        return 0;
    }
    auto it = args.flags.find("out-dir");
    if (it == args.flags.end()) {
        std::cout << ddl.str() << "\n" << procs.str();
    } else {
        fs::create_directories(it->second);
        std::ofstream(fs::path(it->second) / "schema.sql") << ddl.str();
        std::ofstream(fs::path(it->second) / "procedures.sql") << procs.str();
    }
    return 0;
}

int cmd_interpret(const Args& args) {
    if (args.positional.empty()) return usage("missing model path");
    auto op_it = args.flags.find("op");
    auto state_it = args.flags.find("state");
    if (op_it == args.flags.end()) return usage("--op Class.op is required");
    if (state_it == args.flags.end()) return usage("--state FILE is required");
    auto dot = op_it->second.find('.');
    if (dot == std::string::npos) return usage("--op expects Class.op");
    std::string cls = op_it->second.substr(0, dot);
    std::string op = op_it->second.substr(dot + 1);

    auto model = std::make_shared<const BoosterModel>(load_model(args.positional[0]));
    ObjState s = parse_obj_state(model, read_file(state_it->second));
    IoMap io;
    if (auto io_it = args.flags.find("io"); io_it != args.flags.end())
        io = parse_io_text(read_file(io_it->second));
    for (const auto& binding : args.inputs) {
        IoMap one = parse_io_text(binding);
        for (auto& [k, v] : one) io[k] = v;
    }

    ResolvedOp r = resolve_operation(*model, cls, op);
    auto results = eval_gsl(s, io, r.body);
    std::cout << "after-states: " << results.size() << "\n";
    int i = 0;
    for (const auto& [s2, io2] : results) {
        std::cout << "-- state " << ++i << "\n" << serialize_obj_state(s2);
        std::cout << "-- io\n" << serialize_io(io2);
    }
    return 0;
}

int cmd_verify(const Args& args) {
    std::string err;
    SuiteOptions opts;
    opts.compile.guard_mode = guard_mode_of(args, err);
    if (!err.empty()) return usage(err);
    if (auto it = args.flags.find("seed"); it != args.flags.end())
        opts.seed0 = std::stoull(it->second);
    if (auto it = args.flags.find("cases"); it != args.flags.end())
        opts.cases = std::stoi(it->second);
    if (auto it = args.flags.find("mutation"); it != args.flags.end()) {
        static const std::map<std::string, Mutation> names{
            {"drop-index-shift", Mutation::DropIndexShift},
            {"swap-insert-update", Mutation::SwapInsertUpdate},
            {"skip-opposite-write", Mutation::SkipOppositeWrite},
            {"off-by-one-variant", Mutation::OffByOneVariant},
            {"omit-cache-refresh", Mutation::OmitCacheRefresh},
        };
        auto m = names.find(it->second);
        if (m == names.end()) return usage("unknown mutation '" + it->second + "'");
        opts.compile.mutation = m->second;
    }

    int failures = 0;
    int fixture_cases = 0;
    if (opts.compile.mutation == Mutation::None)
        fixture_cases = run_fixture_suite(opts.compile, failures);

    SuiteResult res = run_simulation_suite(opts);
    std::cout << "cases: " << opts.cases << " (+" << fixture_cases << " fixture)"
              << "  simulated: " << res.simulated << "  violations: " << res.violations
              << "  errors: " << res.errors << "  invariant failures: "
              << res.invariant_failures << "\n";
    if (args.verbose) {
        for (const auto& [t, c] : res.template_coverage)
            std::cout << "  template " << t << ": " << c << "\n";
        for (const auto& [t, c] : res.cell_coverage)
            std::cout << "  cell " << t << ": " << c << "\n";
    }
    if (auto it = args.flags.find("report-dir"); it != args.flags.end()) {
        fs::create_directories(it->second);
        for (const auto& [seed, v] : res.failures) {
            std::ofstream f(fs::path(it->second) /
                            ("violation-" + std::to_string(seed) + ".txt"));
            f << v.report;
        }
    }
    for (const auto& [seed, v] : res.failures)
        std::cerr << "seed " << seed << ": "
                  << (v.kind == Verdict::Kind::Violation ? "violation" : "error") << " "
                  << (v.stage.empty() ? "" : "[" + v.stage + "] ") << v.detail << "\n";
    return (failures || !res.ok()) ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage();
    std::string cmd = argv[1];
    Args args;
    std::string err;
    if (!parse_args(argc, argv, args, err)) return usage(err);
    try {
        if (cmd == "compile") return cmd_compile(args, false);
        if (cmd == "emit-schema") return cmd_compile(args, true);
        if (cmd == "interpret") return cmd_interpret(args);
        if (cmd == "verify") return cmd_verify(args);
        return usage("unknown command '" + cmd + "'");
    } catch (const ParseError& e) {
        std::cerr << "parse: " << e.what() << "\n";
    } catch (const ResolveError& e) {
        std::cerr << "resolve: " << e.what() << "\n";
    } catch (const CompileError& e) {
        std::cerr << "compile: " << e.what() << "\n";
    } catch (const EvalError& e) {
        std::cerr << "evaluate: " << e.what() << "\n";
    } catch (const SqlError& e) {
        std::cerr << "sql: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
}
