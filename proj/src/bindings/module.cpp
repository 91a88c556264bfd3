// Python bindings for the main operations: module arithmetic, extension
// classification, fact-database lookups, derivations, and the applications.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpstems/apps.hpp"
#include "hpstems/table.hpp"

#include <cstdlib>

namespace py = pybind11;
using namespace hpstems;
using alg::FgModule;
using alg::Int;

namespace {

std::string default_data_dir() {
    if (const char* env = std::getenv("HPSTEMS_DB")) return env;
    return HPSTEMS_DATA_DIR;
}

struct Session {
    factdb::FactDb db;
    engine::Engine eng;
    explicit Session(const std::string& dir, bool extended)
        : db(factdb::FactDb::load(dir, extended)), eng(db) {}
};

py::dict derivation_to_dict(const engine::Derivation& d) {
    py::dict out;
    out["prime"] = d.prime.convert_to<long long>();
    out["r"] = d.r;
    out["k"] = d.k;
    out["db"] = d.db_hash;
    out["trace"] = d.trace();
    switch (d.status) {
        case engine::Derivation::Status::Unique:
            out["status"] = "unique";
            out["result"] = d.result.str();
            break;
        case engine::Derivation::Status::Ambiguous: {
            out["status"] = "ambiguous";
            py::list cands;
            for (const auto& c : d.candidates) cands.append(c.str());
            out["candidates"] = cands;
            py::list branches;
            for (const auto& b : d.branches) {
                py::dict br;
                br["label"] = b.label;
                br["cok"] = b.cok.str();
                br["ker"] = b.ker.str();
                py::list bc;
                for (const auto& c : b.candidates) bc.append(c.str());
                br["candidates"] = bc;
                branches.append(br);
            }
            out["branches"] = branches;
            break;
        }
        case engine::Derivation::Status::MissingFact:
            out["status"] = "missing-fact";
            out["missing"] = d.missing;
            break;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_hpstems, m) {
    m.doc() = "p-local homotopy groups of the suspended quaternionic projective plane";

    py::class_<Session>(m, "Session")
        .def(py::init([](const std::string& dir, bool extended) {
                 return new Session(dir.empty() ? default_data_dir() : dir, extended);
             }),
             py::arg("data_dir") = "", py::arg("extended") = false)
        .def_property_readonly("db_hash", [](const Session& s) { return s.db.version_hash(); })
        .def("derive",
             [](const Session& s, int r, int k, int prime, bool force_unstable) {
                 return derivation_to_dict(s.eng.derive_pi(r, k, Int(prime), force_unstable));
             },
             py::arg("r"), py::arg("k"), py::arg("prime"), py::arg("force_unstable") = false)
        .def("lookup_group",
             [](const Session& s, int prime, int n, int m) {
                 auto e = s.db.lookup_group(Int(prime), n, m);
                 py::dict out;
                 out["module"] = e.module().str();
                 py::list gens;
                 for (const auto& g : e.gens) gens.append(g.name);
                 out["generators"] = gens;
                 return out;
             },
             py::arg("prime"), py::arg("n"), py::arg("m"))
        .def("fibre_pi",
             [](const Session& s, int m, int k, int prime) {
                 auto f = s.eng.fibre_pi(m, k, Int(prime));
                 return f.module.str();
             },
             py::arg("m"), py::arg("k"), py::arg("prime"))
        .def("boundary_cok_ker",
             [](const Session& s, int m, int k, int prime) {
                 auto b = s.eng.boundary_cok_ker(m, k, Int(prime));
                 return py::make_tuple(b.cok.mod.str(), b.ker.mod.str());
             },
             py::arg("m"), py::arg("k"), py::arg("prime"))
        .def("table_compare",
             [](const Session& s, const std::string& expected_path) {
                 auto expected = table::ExpectedTable::load(
                     expected_path.empty() ? default_data_dir() + "/expected_table.jsonl"
                                           : expected_path);
                 auto rep = table::compare_table(s.eng, expected);
                 py::list rows;
                 for (const auto& row : rep.rows) {
                     py::dict d;
                     d["r"] = row.r;
                     d["k"] = row.k;
                     d["status"] = row.status;
                     d["derived"] = row.derived;
                     d["expected"] = row.expected;
                     rows.append(d);
                 }
                 py::dict out;
                 out["rows"] = rows;
                 out["exit_code"] = rep.exit_code;
                 return out;
             },
             py::arg("expected_path") = "")
        .def("classify",
             [](const Session& s, int k) {
                 auto res = apps::classify_suspended_hp3(s.eng, k);
                 py::dict out;
                 py::list types;
                 for (const auto& t : res.sporadic) {
                     py::dict d;
                     d["name"] = t.name;
                     d["skeleton"] = t.skeleton;
                     d["attach"] = t.attach;
                     d["pi"] = t.pi_top.str();
                     d["p1"] = t.p1_pattern;
                     types.append(d);
                 }
                 out["sporadic"] = types;
                 py::list fams;
                 for (const auto& f : res.families) fams.append(py::make_tuple(f.name, f.pi_formula));
                 out["families"] = fams;
                 return out;
             },
             py::arg("k"));

    m.def("snf",
          [](int prime, const std::vector<std::vector<long long>>& rows) {
              alg::LocalMatrix mat(rows.size(), rows.empty() ? 0 : rows[0].size());
              for (std::size_t i = 0; i < rows.size(); ++i)
                  for (std::size_t j = 0; j < rows[i].size(); ++j)
                      mat.at(i, j) = alg::LocalScalar(Int(rows[i][j]));
              auto s = alg::snf(Int(prime), mat);
              std::vector<std::string> diag;
              for (std::size_t i = 0; i < std::min(mat.rows, mat.cols); ++i)
                  diag.push_back(s.d.at(i, i).str());
              return diag;
          },
          py::arg("prime"), py::arg("rows"), "diagonal of the Smith normal form over Z_(p)");

    m.def("quotient_presentation",
          [](int prime, int n_generators, const std::vector<std::vector<long long>>& relations) {
              alg::LocalMatrix rel(relations.size(), n_generators);
              for (std::size_t i = 0; i < relations.size(); ++i)
                  for (std::size_t j = 0; j < relations[i].size(); ++j)
                      rel.at(i, j) = alg::LocalScalar(Int(relations[i][j]));
              return alg::quotient_presentation(Int(prime), n_generators, rel).str();
          },
          py::arg("prime"), py::arg("n_generators"), py::arg("relations"));

    m.def("p_component",
          [](int free_rank, const std::vector<long long>& torsion, int prime) {
              std::vector<Int> t(torsion.begin(), torsion.end());
              return alg::p_component(free_rank, t, Int(prime)).str();
          },
          py::arg("free_rank"), py::arg("torsion_orders"), py::arg("prime"));

    m.def("stable_range_bound",
          [](int d, bool sphere, int n) {
              return alg::stable_range_bound(d, alg::SpaceSpec{sphere, n});
          },
          py::arg("d"), py::arg("sphere") = false, py::arg("sphere_dim") = 0);

    m.def("classify_extensions",
          [](int prime, const std::string& left, const std::string& right) {
              Int p(prime);
              auto sol = ext::classify_extensions({FgModule::parse(p, left), FgModule::parse(p, right)});
              std::vector<std::string> out;
              for (const auto& c : sol.candidates) out.push_back(c.module.str());
              return out;
          },
          py::arg("prime"), py::arg("left"), py::arg("right"));

    m.def("brute_force_oracle",
          [](int prime, const std::string& left, const std::string& right) {
              Int p(prime);
              auto sol = ext::brute_force_oracle({FgModule::parse(p, left), FgModule::parse(p, right)});
              std::vector<std::string> out;
              for (const auto& c : sol.candidates) out.push_back(c.module.str());
              return out;
          },
          py::arg("prime"), py::arg("left"), py::arg("right"));

    m.def("solve_with_order_at_least",
          [](int prime, const std::string& left, const std::string& right, long long order) {
              Int p(prime);
              ext::Constraint c;
              c.kind = ext::Constraint::Kind::ContainsOrderGeq;
              c.value = Int(order);
              auto sol = ext::solve_with_constraints(
                  {FgModule::parse(p, left), FgModule::parse(p, right)}, {c});
              std::vector<std::string> out;
              for (const auto& cand : sol.candidates) out.push_back(cand.module.str());
              return out;
          },
          py::arg("prime"), py::arg("left"), py::arg("right"), py::arg("order"));

    m.def("smash_report", [](const std::string& space, int prime) {
        auto rep = apps::smash_report(space, Int(prime));
        py::dict out;
        out["plus_degrees"] = rep.plus.degrees();
        out["minus_degrees"] = rep.minus.degrees();
        out["plus"] = rep.plus_id;
        out["minus"] = rep.minus_id;
        return out;
    });

    m.def("skeleton_of_pinch_fibre", [](int k, int prime) {
        static factdb::FactDb db = factdb::FactDb::load(default_data_dir(), false);
        auto model = cw::skeleton_of_pinch_fibre(db, k, Int(prime));
        return model.complex().str();
    });

    m.attr("__version__") = "1.0.0";
    m.attr("data_dir") = default_data_dir();
}
