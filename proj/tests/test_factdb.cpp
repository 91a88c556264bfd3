#include <doctest.h>

#include "hpstems/engine.hpp"

#include "hpstems/factdb.hpp"

#include <filesystem>
#include <fstream>

using namespace hpstems;
using alg::FgModule;
using alg::Int;

namespace {

const factdb::FactDb& db() {
    static factdb::FactDb instance = factdb::FactDb::load(HPSTEMS_DATA_DIR, false);
    return instance;
}

factdb::ClassExpr gen(const factdb::GroupEntry& e, const std::string& name, Int coeff = 1) {
    factdb::ClassExpr x{e, std::vector<Int>(e.gens.size(), 0)};
    x.coeffs[*e.find(name)] = coeff;
    return x;
}

}  // namespace

TEST_CASE("lookup returns the recorded entries and never fabricates zero") {
    auto e = db().lookup_group(3, 5, 8);
    CHECK(e.module() == FgModule(3, 0, {1}));
    CHECK(e.gens[0].name == "alpha1(5)");

    e = db().lookup_group(2, 6, 14);
    CHECK(e.module() == FgModule(2, 0, {3, 1}));

    for (int n : {2, 5, 9, 17}) {
        e = db().lookup_group(2, n, n);
        CHECK(e.module() == FgModule(2, 1, {}));
        CHECK(e.gens[0].name == "i" + std::to_string(n));
    }

    CHECK_THROWS_AS(db().lookup_group(2, 5, 17), factdb::MissingFact);  // 12-stem on S^5 not shipped
}

TEST_CASE("stable entries are materialized from the stem record") {
    auto e = db().lookup_group(2, 14, 17);
    CHECK(e.from_stable);
    CHECK(e.gens[0].name == "nu14");
    e = db().lookup_group(2, 9, 18);
    CHECK(!e.from_stable);  // 9-stem on S^9 is below the stable range
    e = db().lookup_group(2, 11, 20);
    CHECK(e.from_stable);
    CHECK(e.module() == FgModule(2, 0, {1, 1, 1}));
}

TEST_CASE("composition facts and automatic rules") {
    // nu6 o eta9 = 0 (pi_10(S^6) = 0)
    auto eta9 = db().lookup_group(2, 9, 10);
    auto r = db().compose(2, 6, 9, "nu6", gen(eta9, "eta9"));
    CHECK(r.is_zero());

    // alpha1(5) o alpha2(8) = -3 beta1(5)
    auto a28 = db().lookup_group(3, 8, 15);
    r = db().compose(3, 5, 8, "alpha1(5)", gen(a28, "alpha2(8)"));
    CHECK(!r.is_zero());
    CHECK(*r.order() == 3);

    // identity: i5 o x = x
    auto nu5 = db().lookup_group(2, 5, 8);
    r = db().compose(2, 5, 5, "i5", gen(nu5, "nu5"));
    CHECK(r.str() == "nu5");

    // finite order into a torsion-free target composes to zero
    auto eta92 = db().lookup_group(2, 9, 11);
    r = db().compose(2, 6, 9, "nu6", gen(eta92, "eta9^2"));
    CHECK(r.is_zero());

    // unknown composite is a hard missing-fact diagnostic, not zero
    auto mu9 = db().lookup_group(2, 9, 18);
    CHECK_THROWS_AS(db().compose(2, 6, 9, "nu6", gen(mu9, "mu9")), factdb::MissingFact);
}

TEST_CASE("bracket indeterminacy from the composition facts") {
    // Ind<nu7, 2nu10, 4i13> = Z/2<4 sigma'>
    auto ind = db().bracket_indeterminacy(2, 7, 10, "nu7", 13, 2, "nu10", 13, 4, "i13");
    CHECK(ind.complete);
    REQUIRE(ind.gens.size() == 1);
    CHECK(ind.gens[0].str() == "4 sigma'");
    CHECK(*ind.gens[0].order() == 2);

    // Ind<nu5, 2nu8, 4i11> = nu5 o 0 + 4 pi_12(S^5) = 0
    ind = db().bracket_indeterminacy(2, 5, 8, "nu5", 11, 2, "nu8", 11, 4, "i11");
    CHECK(ind.complete);
    CHECK(ind.gens.empty());

    // gamma annihilated by its coefficient: the coset degenerates to the subgroup
    ind = db().bracket_indeterminacy(2, 7, 10, "nu7", 13, 2, "nu10", 13, 16, "i13");
    CHECK(ind.gens.empty());
}

TEST_CASE("validate flags corrupted databases") {
    CHECK(db().validate().empty());

    std::filesystem::path tmp = std::filesystem::temp_directory_path() / "hpstems_bad_db";
    std::filesystem::create_directories(tmp / "factdb");
    for (const char* f : {"meta.jsonl", "stable_p2.jsonl", "stable_p3.jsonl", "spheres_p2.jsonl",
                          "spheres_p3.jsonl", "facts_p3.jsonl", "hp2_stable.jsonl"})
        std::filesystem::copy_file(std::filesystem::path(HPSTEMS_DATA_DIR) / "factdb" / f,
                                   tmp / "factdb" / f,
                                   std::filesystem::copy_options::overwrite_existing);
    {
        std::ifstream in(std::filesystem::path(HPSTEMS_DATA_DIR) / "factdb" / "facts_p2.jsonl");
        std::ofstream out(tmp / "factdb" / "facts_p2.jsonl");
        out << in.rdbuf();
        // result of order 8 from a factor of order 2, inside a zero group
        out << R"({"kind":"composition","prime":2,"sphere":6,"left_degree":9,"left":"nu6","right":"eta9","right_degree":17,"result":"nubar6nu14","cite":"corrupt"})"
            << "\n";
    }
    auto bad = factdb::FactDb::load(tmp.string(), false);
    CHECK(!bad.validate().empty());
}

TEST_CASE("normalized fact files round-trip byte-identically") {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(fs::path(HPSTEMS_DATA_DIR) / "factdb")) {
        std::string norm = factdb::FactDb::normalize_file(entry.path().string());
        fs::path tmp = fs::temp_directory_path() / "hpstems_norm.jsonl";
        {
            std::ofstream out(tmp);
            out << norm;
        }
        CHECK(factdb::FactDb::normalize_file(tmp.string()) == norm);
    }
}

TEST_CASE("referential integrity of the shipped entries") {
    for (auto [n, m] : {std::pair{5, 15}, {6, 17}, {8, 18}, {9, 20}}) {
        auto e = db().lookup_group(2, n, m);
        for (const auto& g : e.gens) CHECK(*e.find(g.name) < e.gens.size());
    }
}

TEST_CASE("db version hash is stable across loads and sees the extended file") {
    auto a = factdb::FactDb::load(HPSTEMS_DATA_DIR, false);
    auto b = factdb::FactDb::load(HPSTEMS_DATA_DIR, false);
    CHECK(a.version_hash() == b.version_hash());
    auto c = factdb::FactDb::load(HPSTEMS_DATA_DIR, true);
    CHECK(a.version_hash() != c.version_hash());
}

TEST_CASE("a missing dependency surfaces as a named diagnostic, never zero") {
    // drop pi_14(S^6) and try the derivation that consumes it
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "hpstems_missing_db";
    fs::create_directories(tmp / "factdb");
    for (const char* f : {"meta.jsonl", "stable_p2.jsonl", "stable_p3.jsonl", "spheres_p3.jsonl",
                          "facts_p2.jsonl", "facts_p3.jsonl", "hp2_stable.jsonl"})
        fs::copy_file(fs::path(HPSTEMS_DATA_DIR) / "factdb" / f, tmp / "factdb" / f,
                      fs::copy_options::overwrite_existing);
    {
        std::ifstream in(fs::path(HPSTEMS_DATA_DIR) / "factdb" / "spheres_p2.jsonl");
        std::ofstream out(tmp / "factdb" / "spheres_p2.jsonl");
        std::string line;
        while (std::getline(in, line))
            if (line.find("\"sphere\":6,\"degree\":14") == std::string::npos) out << line << "\n";
    }
    auto crippled = factdb::FactDb::load(tmp.string(), false);
    engine::Engine eng(crippled);
    auto d = eng.derive_pi(12, 2, 2);
    CHECK(d.status == engine::Derivation::Status::MissingFact);
    CHECK(d.missing.find("n=6, m=14") != std::string::npos);
}

TEST_CASE("unknown products come back symbolically from the non-throwing compose") {
    auto mu9 = db().lookup_group(2, 9, 18);
    auto c = db().compose_or_symbolic(2, 6, 9, "nu6", gen(mu9, "mu9"));
    CHECK(c.symbolic);
    CHECK(c.symbol.find("nu6 o") == 0);
    auto eta9 = db().lookup_group(2, 9, 10);
    c = db().compose_or_symbolic(2, 6, 9, "nu6", gen(eta9, "eta9"));
    CHECK(!c.symbolic);
    CHECK(c.value.is_zero());
}
