#pragma once
// Instantiates the exact-sequence machinery of the pinch fibration: boundary
// cokernels/kernels through the BUND reduction, homotopy of the fibre
// skeleton through PISK, and the determination of pi_{r+k}(Sigma^k HP^2) as a
// constrained extension problem with a replayable trace.

#include "hpstems/cw.hpp"
#include "hpstems/extensions.hpp"
#include "hpstems/factdb.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hpstems::engine {

using alg::FgModule;
using alg::Int;
using alg::LocalMatrix;
using alg::LocalScalar;

struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

struct NamedModule {
    FgModule mod;
    std::vector<std::string> names;  // aligned with canonical generators

    std::string str() const;
    static NamedModule of(const FgModule& m, std::vector<std::string> names);
};

struct Step {
    int id{0};
    std::string rule, inputs, output, cite;
};

class Trace {
  public:
    int add(const std::string& rule, const std::string& inputs, const std::string& output,
            const std::string& cite);
    const std::vector<Step>& steps() const { return steps_; }
    std::string render() const;

  private:
    std::vector<Step> steps_;
};

struct Derivation {
    Int prime{2};
    int r{0}, k{0};
    enum class Status { Unique, Ambiguous, MissingFact } status{Status::Unique};
    FgModule result;
    std::vector<FgModule> candidates;
    struct Branch {
        std::string label;
        FgModule cok, ker;
        std::vector<FgModule> candidates;
    };
    std::vector<Branch> branches;
    std::string missing;
    std::string db_hash;
    std::vector<Step> steps;

    std::string trace() const;
};

// A subgroup or quotient bookkeeping result.
struct QuotientResult {
    NamedModule module;
    LocalMatrix map;  // canonical coords of each ambient generator image
};

NamedModule span_subgroup(const FgModule& ambient, const std::vector<std::string>& ambient_names,
                          const std::vector<std::vector<LocalScalar>>& span);
QuotientResult quotient_by(const FgModule& ambient, const std::vector<std::string>& ambient_names,
                           const std::vector<std::vector<LocalScalar>>& span);

class Engine {
  public:
    explicit Engine(const factdb::FactDb& db) : db_(db) {}
    const factdb::FactDb& db() const { return db_; }

    struct Fibre {
        NamedModule module;
        LocalMatrix j_map;  // canonical coords of j(g) per bottom-entry generator
        factdb::GroupEntry bottom;
        int m{0}, k{0};
    };
    Fibre fibre_pi(int m, int k, const Int& p, Trace* tr = nullptr) const;

    struct Boundary {
        NamedModule cok;  // of d_{k*m}: pi_m(S^{8+k}) -> pi_{m-1}(F_k)
        NamedModule ker;
        int m{0}, k{0};
    };
    Boundary boundary_cok_ker(int m, int k, const Int& p, const std::string& branch = "",
                              Trace* tr = nullptr) const;
    NamedModule boundary_cok(int m, int k, const Int& p, const std::string& branch = "",
                             Trace* tr = nullptr) const;
    NamedModule boundary_ker(int m, int k, const Int& p, const std::string& branch = "",
                             Trace* tr = nullptr) const;

    Derivation derive_pi(int r, int k, const Int& p, bool force_unstable = false) const;

  private:
    struct ShortData {
        NamedModule cok, ker;
        std::vector<ext::Constraint> constraints;
        std::vector<std::string> constraint_cites;
    };
    ShortData assemble_short(int r, int k, const Int& p, const std::string& branch, Trace& tr) const;
    void harvest_constraints(int r, int k, const Int& p, ShortData& sd, Trace& tr) const;

    const factdb::FactDb& db_;
};

// Exact-sequence instance checks (snake-lemma bookkeeping, zero-node
// propagation, order audits).
struct SequenceInstance {
    std::string tmpl;
    std::vector<std::optional<FgModule>> nodes;
    struct Arrow {
        std::optional<bool> mono, epi;
    };
    std::vector<Arrow> arrows;  // between consecutive nodes
    bool ladder_end_monos = false;
};

std::vector<factdb::Violation> consistency_checks(const SequenceInstance& inst);

}  // namespace hpstems::engine
