// Command-line front end: run derivations, reproduce and diff the main table,
// solve ad-hoc extension problems, run smash splittings and the
// classification enumeration.

#include <CLI11.hpp>

#include "hpstems/apps.hpp"
#include "hpstems/table.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace hpstems;
using alg::FgModule;
using alg::Int;

namespace {

std::string default_data_dir() {
    if (const char* env = std::getenv("HPSTEMS_DB")) return env;
    return HPSTEMS_DATA_DIR;
}

void write_trace(const std::string& trace_dir, const engine::Derivation& d) {
    if (trace_dir.empty()) return;
    std::filesystem::create_directories(trace_dir);
    std::ostringstream name;
    name << trace_dir << "/p" << d.prime << "_r" << d.r << "_k" << d.k << ".trace";
    std::ofstream out(name.str());
    out << "# goal: pi_" << d.r + d.k << "(Sigma^" << d.k << " HP2) at p=" << d.prime << "\n";
    out << "# db: " << d.db_hash << "\n";
    out << d.trace();
}

std::string status_str(const engine::Derivation& d) {
    switch (d.status) {
        case engine::Derivation::Status::Unique: return "unique";
        case engine::Derivation::Status::Ambiguous: return "ambiguous";
        default: return "missing-fact";
    }
}

int run_derive(const std::string& data_dir, const std::string& trace_dir, int prime, int r,
               std::optional<int> k, bool all, bool extended) {
    factdb::FactDb db = factdb::FactDb::load(data_dir, extended);
    engine::Engine eng(db);
    std::vector<int> ks;
    if (all)
        for (int i = 0; i <= r - 5; ++i) ks.push_back(i);
    else if (k)
        ks.push_back(*k);
    else {
        std::cerr << "derive: need --k or --all\n";
        return 2;
    }
    int exit_code = 0;
    for (int kk : ks) {
        engine::Derivation d = eng.derive_pi(r, kk, Int(prime));
        write_trace(trace_dir, d);
        std::cout << "pi_" << r + kk << "(Sigma^" << kk << " HP2) (p=" << prime << "): ";
        if (d.status == engine::Derivation::Status::Unique) {
            std::cout << d.result.str() << "\n";
        } else if (d.status == engine::Derivation::Status::Ambiguous) {
            std::cout << "ambiguous\n";
            for (const auto& c : d.candidates) std::cout << "  candidate: " << c.str() << "\n";
            for (const auto& b : d.branches) {
                std::cout << "  branch [" << b.label << "]: 0 -> " << b.cok.str() << " -> pi -> "
                          << b.ker.str() << " -> 0\n";
                for (const auto& c : b.candidates) std::cout << "    candidate: " << c.str() << "\n";
            }
            exit_code = std::max(exit_code, 3);
        } else {
            std::cout << "missing fact: " << d.missing << "\n";
            exit_code = std::max(exit_code, 2);
        }
    }
    return exit_code;
}

int run_table(const std::string& data_dir, const std::string& trace_dir, bool compare,
              const std::string& out_file) {
    factdb::FactDb db = factdb::FactDb::load(data_dir, false);
    engine::Engine eng(db);
    table::ExpectedTable expected = table::ExpectedTable::load(data_dir + "/expected_table.jsonl");
    table::RunReport rep = table::compare_table(eng, expected);
    std::cout << rep.render();
    if (!out_file.empty()) {
        std::ofstream out(out_file);
        for (const auto& row : rep.rows)
            out << "{\"kind\":\"result\",\"r\":" << row.r << ",\"k\":" << row.k << ",\"status\":\""
                << row.status << "\",\"derived\":\"" << row.derived << "\",\"expected\":\""
                << row.expected << "\"}\n";
    }
    if (!trace_dir.empty())
        for (const auto& row : rep.rows) {
            write_trace(trace_dir, eng.derive_pi(row.r, row.k, 2));
            write_trace(trace_dir, eng.derive_pi(row.r, row.k, 3));
        }
    if (compare) {
        if (rep.exit_code == 0)
            std::cout << "table reproduced: all " << rep.rows.size() << " cells match\n";
        else
            std::cout << "table comparison FAILED (exit " << rep.exit_code << ")\n";
        return rep.exit_code;
    }
    return 0;
}

int run_ext(int prime, const std::string& left, const std::string& right,
            std::optional<long long> order_at_least, std::optional<long long> order_exact_lift,
            std::optional<long long> no_order, bool lift_not_div, bool oracle) {
    Int p(prime);
    ext::ExtensionProblem prob{FgModule::parse(p, left), FgModule::parse(p, right)};
    std::vector<ext::Constraint> cs;
    if (order_at_least) {
        ext::Constraint c;
        c.kind = ext::Constraint::Kind::ContainsOrderGeq;
        c.value = Int(*order_at_least);
        cs.push_back(c);
    }
    if (order_exact_lift) {
        ext::Constraint c;
        c.kind = ext::Constraint::Kind::LiftOrderExact;
        c.value = Int(*order_exact_lift);
        cs.push_back(c);
    }
    if (no_order) {
        ext::Constraint c;
        c.kind = ext::Constraint::Kind::NoElementOfOrder;
        c.value = Int(*no_order);
        cs.push_back(c);
    }
    if (lift_not_div) {
        ext::Constraint c;
        c.kind = ext::Constraint::Kind::LiftNotDivisible;
        cs.push_back(c);
    }
    ext::SolutionSet sol =
        cs.empty() ? ext::classify_extensions(prob) : ext::solve_with_constraints(prob, cs);
    for (const auto& cand : sol.candidates) std::cout << cand.module.str() << "\n";
    for (const auto& n : sol.notes) std::cout << "note: " << n << "\n";
    if (oracle) {
        ext::SolutionSet ref = ext::brute_force_oracle(prob);
        bool same = true;
        if (cs.empty()) {
            auto a = sol.modules();
            auto b = ref.modules();
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            same = a == b;
        } else {
            for (const auto& c : sol.candidates) same = same && ref.contains(c.module);
        }
        std::cout << (same ? "oracle agrees" : "oracle DISAGREES") << "\n";
        if (!same) return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-local homotopy groups of the suspended quaternionic projective plane"};
    app.require_subcommand(1);

    std::string data_dir = default_data_dir();
    std::string trace_dir;
    app.add_option("--db", data_dir, "fact database directory");
    app.add_option("--trace-dir", trace_dir, "directory for derivation traces");

    auto* derive = app.add_subcommand("derive", "derive pi_{r+k}(Sigma^k HP2)");
    int prime = 2, r = 11;
    std::optional<int> kopt;
    bool all = false, extended = false;
    derive->add_option("--prime", prime, "prime (2 or 3)")->required();
    derive->add_option("--r", r, "stem r (7..15, or 36 with --extended)")->required();
    int kval = 0;
    auto* kflag = derive->add_option("--k", kval, "suspension count");
    derive->add_flag("--all", all, "all displayed columns 0..r-5");
    derive->add_flag("--extended", extended, "load the extended 36-stem fact file");

    auto* tbl = app.add_subcommand("table", "derive and print the main table");
    bool compare = false;
    std::string out_file;
    tbl->add_flag("--compare", compare, "diff against the expected table; nonzero exit on any diff");
    tbl->add_option("--out", out_file, "write a machine-readable run file");

    auto* extc = app.add_subcommand("ext", "classify extension middle terms");
    int eprime = 2;
    std::string left, right;
    std::optional<long long> order_at_least, order_exact_lift, no_order;
    bool lift_not_div = false, oracle = false;
    extc->add_option("--p", eprime, "prime")->required();
    extc->add_option("--left", left, "subgroup module, e.g. \"Z/8+Z(2)\"")->required();
    extc->add_option("--right", right, "quotient module, e.g. \"Z/16\"")->required();
    extc->add_option("--order-at-least", order_at_least, "keep candidates with torsion order >= N");
    extc->add_option("--lift-order", order_exact_lift, "quotient generator lifts with order exactly N");
    extc->add_option("--no-element-of-order", no_order, "reject candidates with an element of order N");
    extc->add_flag("--lift-not-divisible", lift_not_div,
                   "quotient generator lifts to an element outside pB");
    extc->add_flag("--oracle", oracle, "cross-check against the cocycle-enumeration oracle");

    auto* smash = app.add_subcommand("smash", "idempotent splitting of Sigma X^X");
    std::string space = "HP2";
    int sprime = 3;
    smash->add_option("--space", space, "HP2, HP3, or a graded-homology JSONL file")->required();
    smash->add_option("--prime", sprime, "odd prime")->required();

    auto* classify = app.add_subcommand("classify", "homotopy types of suspended homology HP3's");
    int ck = 1, cprime = 3;
    classify->add_option("--k", ck, "suspension count (>= 1)")->required();
    classify->add_option("--prime", cprime, "must be 3");

    auto* validate = app.add_subcommand("validate", "validate the fact database");
    bool vextended = false;
    validate->add_flag("--extended", vextended, "include the extended fact file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (derive->parsed())
            return run_derive(data_dir, trace_dir, prime, r, kflag->count() ? std::optional<int>(kval) : std::nullopt,
                              all, extended);
        if (tbl->parsed()) return run_table(data_dir, trace_dir, compare, out_file);
        if (extc->parsed())
            return run_ext(eprime, left, right, order_at_least, order_exact_lift, no_order,
                           lift_not_div, oracle);
        if (smash->parsed()) {
            if (sprime == 2) {
                std::cerr << "smash: p = 2 rejected (the idempotents need 1/2)\n";
                return 2;
            }
            apps::SmashReport rep = apps::smash_report(space, Int(sprime));
            std::cout << "Sigma " << space << " ^ " << space << " at p=" << sprime << ":\n"
                      << rep.render();
            return 0;
        }
        if (classify->parsed()) {
            if (cprime != 3) {
                std::cerr << "classify: only p = 3 is in scope\n";
                return 2;
            }
            factdb::FactDb db = factdb::FactDb::load(data_dir, false);
            engine::Engine eng(db);
            apps::ClassifyResult res = apps::classify_suspended_hp3(eng, ck);
            std::cout << res.render();
            return 0;
        }
        if (validate->parsed()) {
            factdb::FactDb db = factdb::FactDb::load(data_dir, vextended);
            auto vs = db.validate();
            // every fact cited by a shipped derivation must exist
            engine::Engine eng(db);
            table::ExpectedTable expected =
                table::ExpectedTable::load(data_dir + "/expected_table.jsonl");
            for (const auto& cell : expected.cells)
                for (int prime : {2, 3}) {
                    auto d = eng.derive_pi(cell.r, cell.k, prime);
                    if (d.status == engine::Derivation::Status::MissingFact)
                        vs.push_back({"derivation (" + std::to_string(cell.r) + "," +
                                      std::to_string(cell.k) + ") at p=" + std::to_string(prime) +
                                      ": " + d.missing});
                }
            for (const auto& v : vs) std::cout << "violation: " << v.what << "\n";
            std::cout << (vs.empty() ? "database valid" : "database INVALID") << " (db "
                      << db.version_hash() << ")\n";
            return vs.empty() ? 0 : 2;
        }
    } catch (const ext::InconsistentFacts& e) {
        std::cerr << "inconsistent fact database: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
