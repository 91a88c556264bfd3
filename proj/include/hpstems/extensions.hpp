#pragma once
// Classification of middle terms of short exact sequences
//   0 -> A -> B -> C -> 0
// of Z_(p)-modules with C a finite direct sum of cyclic p-groups, plus
// constraint-based selection among the candidates.

#include "hpstems/local_algebra.hpp"

#include <map>
#include <string>
#include <vector>

namespace hpstems::ext {

using alg::FgModule;
using alg::Int;
using alg::LocalMatrix;
using alg::LocalScalar;

struct ExtError : std::runtime_error {
    explicit ExtError(const std::string& what) : std::runtime_error(what) {}
};
struct InconsistentFacts : std::runtime_error {
    explicit InconsistentFacts(const std::string& what) : std::runtime_error(what) {}
};

struct ExtensionProblem {
    FgModule left;   // A
    FgModule right;  // C, torsion in all supported uses
};

// One representing cocycle for a single cyclic step 0 -> A -> B -> Z/p^n -> 0:
// zeta(1) as integer coefficients over the generators of A (free gens first,
// then torsion gens in canonical order).
struct ExtRep {
    unsigned n{0};
    std::vector<Int> zeta;
};

struct Candidate {
    FgModule module;
    std::vector<ExtRep> reps;  // empty when C had several factors (iterated form)
};

struct SolutionSet {
    std::vector<Candidate> candidates;
    std::vector<std::string> notes;

    bool contains(const FgModule& m) const;
    std::vector<FgModule> modules() const;
};

struct Constraint {
    enum class Kind {
        ContainsOrderGeq,    // some torsion element of order >= value
        ContainsOrderExact,  // some torsion element of order == value
        NoElementOfOrder,    // torsion exponent < value
        LiftOrderExact,      // the C generator lifts to an element of order == value
        LiftOrderGeq,        // some lift of the C generator has order >= value (infinite allowed)
        LiftNotDivisible,    // some lift of the C generator lies outside pB
        LeftDivisible,       // the image of A generator #left_index is divisible by p in B
        ContainsSubgroup,    // B admits a subgroup isomorphic to `subgroup`
        TorsionOrderLeq,     // |torsion(B)| <= value
    };
    Kind kind{Kind::ContainsOrderGeq};
    Int value{0};
    FgModule subgroup;
    std::size_t left_index{0};

    std::string describe() const;
};

// Ext^1 computed factor by factor; rejects C with a free part.
FgModule ext_group(const FgModule& c, const FgModule& a);

// All isomorphism classes of B, each with at least one explicit representative
// cocycle, obtained by enumerating unit-normalized representatives through
// quotient_presentation.
SolutionSet classify_extensions(const ExtensionProblem& p);

// Independent verifier: enumerates every homomorphism zeta in the
// projective-resolution description (desk scale only).
SolutionSet brute_force_oracle(const ExtensionProblem& p);

// The printed closed-form case split for A = Z_(p) + Z/p^m, C = Z/p^n.
std::vector<FgModule> lemma28_closed_form(const Int& p, unsigned m, unsigned n);

SolutionSet solve_with_constraints(const ExtensionProblem& p, const std::vector<Constraint>& cs);

}  // namespace hpstems::ext
