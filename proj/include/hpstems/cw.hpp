#pragma once
// Cell structures and mod-p homology: the relative James fibre of the pinch
// map, two-cell skeleton models, Whitehead-product rewriting, unit
// normalization of attaching classes, and symmetric-square splittings.

#include "hpstems/factdb.hpp"

#include <string>
#include <vector>

namespace hpstems::cw {

using alg::FgModule;
using alg::Int;
using alg::LocalScalar;

struct CwError : std::runtime_error {
    explicit CwError(const std::string& what) : std::runtime_error(what) {}
};

struct Cell {
    int dim{0};
    std::string attach;  // printable attaching class; empty for the bottom cell
};

struct CellComplex {
    std::vector<Cell> cells;  // nondecreasing dimensions
    std::string str() const;  // "S^a u_{class} e^b u ..." / wedges as "v"
};

// Cell dimensions n, n+m, n+2m, ... of J(M_{S^n}, S^m) up to `cutoff`.
std::vector<int> fibre_cell_dims(int n, int m, int cutoff);
// sk_r(J(M_{S^n}, S^m)) = J_t with r = m(t-1)+n.
int skeleton_filtration_level(int n, int m, int r);

struct GradedModP {
    Int prime{3};
    std::vector<std::pair<std::string, int>> basis;  // (name, degree)
    // P^1 action in homology (degree -2(p-1)*2 as used: -4 at p=3):
    // basis index -> sum of (coefficient, basis index)
    std::vector<std::vector<std::pair<Int, std::size_t>>> p1;

    static GradedModP hp(int cells, const Int& p);  // H(HP^cells), generators x,y,z
    std::vector<int> degrees() const;
};

// H(J(X, A)) = H(X) (x) H(Omega Sigma A') basis through degree `cutoff`,
// where ha is the homology of A = Sigma A'.
GradedModP james_homology(const GradedModP& hx, const GradedModP& ha, int cutoff);

struct SmashSplit {
    GradedModP plus;   // Im (1+(12))/2
    GradedModP minus;  // Im (1-(12))/2
};
// Idempotent splitting of H(Sigma X ^ X) with Koszul signs; odd primes only.
SmashSplit smash_square_split(const GradedModP& hx);

// Identification of a summand by its P^1 pattern: "S^d", "Sigma^k HP^2",
// "Sigma^k HP^3", or a cell-complex description.
std::string identify_summand(const GradedModP& part);

struct WhiteheadReduction {
    std::string rewritten;  // "[i_m,i_m] o <class>" form, or the original
    bool resolved = false;
    bool zero = false;
    bool symbolic = false;      // nonzero but only known by name
    std::string value;          // printable value when resolved or symbolic
    factdb::ClassExpr expr;     // coordinates when fully resolved in an entry
};

// Rewrites [i_m, g_m] to [i_m,i_m] o (smash factor) and resolves through the
// Whitehead facts and composition algebra.  Accepts "[i6,nu6]", "[i8,i8]",
// "[i7,i7]onu13".
WhiteheadReduction whitehead_reduce(const factdb::FactDb& db, const Int& p, const std::string& expr);

struct TwoCellModel {
    int k{0};
    int bottom{0};        // 4+k
    int attach_from{0};   // 10+2k
    int top_cell{0};      // 11+2k
    bool wedge = false;
    bool symbolic = false;              // attach known only as a nonzero name
    std::string attach_name;            // printable attaching class
    factdb::ClassExpr attach;           // coordinates when resolvable
    CellComplex complex() const;
};

// Two-cell model of sk_{3k+17}(F_k) via Whitehead reduction of the attaching
// class ([i,nu] at p=2, [i,alpha1] at p=3).
TwoCellModel skeleton_of_pinch_fibre(const factdb::FactDb& db, int k, const Int& p);

// Canonical representative of the orbit of an attaching class under
// multiplication by units of Z_(p), componentwise over the given coordinate
// components (Cor. "C_{t alpha} ~ C_alpha" and its wedge refinement).
// `components` partitions the coordinate indices.
std::vector<LocalScalar> normalize_attaching(const FgModule& ambient,
                                             const std::vector<LocalScalar>& coords,
                                             const std::vector<std::vector<std::size_t>>& components);

}  // namespace hpstems::cw
