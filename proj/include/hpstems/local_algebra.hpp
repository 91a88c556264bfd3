#pragma once
// Exact arithmetic over the p-local integers Z_(p): scalars, matrices,
// Smith normal form with p-valuation pivoting, and canonical forms of
// finitely generated Z_(p)-modules.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpstems::alg {

using Int = boost::multiprecision::cpp_int;

struct AlgError : std::runtime_error {
    explicit AlgError(const std::string& what) : std::runtime_error(what) {}
};

Int int_gcd(Int a, Int b);
Int int_pow(const Int& base, unsigned exp);

/// p-adic valuation of a nonzero integer.
int valuation(const Int& x, const Int& p);

// An element of Z_(p): a reduced fraction whose denominator is a unit.
// The prime is contextual; constructors that know p enforce p | den is
// impossible.
struct LocalScalar {
    Int num{0};
    Int den{1};

    LocalScalar() = default;
    LocalScalar(Int n) : num(std::move(n)), den(1) {}
    LocalScalar(Int n, Int d);

    static LocalScalar in_ring(const Int& p, Int n, Int d);

    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }
    int val(const Int& p) const;  // +infinity encoded as INT_MAX for 0
    bool is_unit(const Int& p) const { return !is_zero() && val(p) == 0; }

    LocalScalar operator-() const { return LocalScalar(-num, den); }
    LocalScalar operator+(const LocalScalar& o) const;
    LocalScalar operator-(const LocalScalar& o) const;
    LocalScalar operator*(const LocalScalar& o) const;
    LocalScalar operator/(const LocalScalar& o) const;
    bool operator==(const LocalScalar& o) const { return num == o.num && den == o.den; }
    bool operator!=(const LocalScalar& o) const { return !(*this == o); }

    // Residue mod p^e (denominator inverted mod p^e); requires unit denominator.
    Int mod_power(const Int& p, unsigned e) const;

    std::string str() const;

  private:
    void reduce();
};

struct LocalMatrix {
    std::size_t rows{0};
    std::size_t cols{0};
    std::vector<LocalScalar> entries;

    LocalMatrix() = default;
    LocalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}

    static LocalMatrix identity(std::size_t n);

    LocalScalar& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    const LocalScalar& at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

    LocalMatrix mul(const LocalMatrix& o) const;
    LocalMatrix transpose() const;
    LocalScalar det() const;  // square only, fraction Gauss
    bool operator==(const LocalMatrix& o) const;
};

// U * M * V = D with D diagonal, entries powers of p in divisibility order
// (units normalized to 1), U and V invertible over Z_(p).
struct SnfResult {
    LocalMatrix u, d, v;
};

SnfResult snf(const Int& p, const LocalMatrix& m);

// Canonical form of a finitely generated Z_(p)-module:
//   Z_(p)^free_rank + sum of Z/p^e, exponents sorted descending.
// Two modules are isomorphic iff they compare equal.
struct FgModule {
    Int prime{2};
    int free_rank{0};
    std::vector<unsigned> torsion;  // exponents, descending

    FgModule() = default;
    FgModule(Int p, int rank, std::vector<unsigned> exps);

    static FgModule zero(const Int& p) { return FgModule(p, 0, {}); }
    static FgModule free_module(const Int& p, int rank) { return FgModule(p, rank, {}); }
    static FgModule cyclic(const Int& p, unsigned e) { return FgModule(p, 0, {e}); }

    bool is_zero() const { return free_rank == 0 && torsion.empty(); }
    bool is_torsion() const { return free_rank == 0; }
    std::size_t gen_count() const { return static_cast<std::size_t>(free_rank) + torsion.size(); }
    Int torsion_order() const;
    unsigned exponent() const { return torsion.empty() ? 0 : torsion.front(); }
    Int max_torsion_order() const { return torsion.empty() ? Int(1) : int_pow(prime, torsion.front()); }

    FgModule direct_sum(const FgModule& o) const;
    // Whether a subgroup isomorphic to `sub` can embed in this module.
    bool contains_subgroup(const FgModule& sub) const;

    bool operator==(const FgModule& o) const {
        return prime == o.prime && free_rank == o.free_rank && torsion == o.torsion;
    }
    bool operator!=(const FgModule& o) const { return !(*this == o); }
    bool operator<(const FgModule& o) const;

    // Text form "Z(p)^r + Z/q1 + ..." with q = p^e; "0" for the zero module.
    std::string str() const;
    static FgModule parse(const Int& p, const std::string& text);
};

// Element of an FgModule in canonical coordinates: free coordinates first,
// then one coordinate per torsion factor (reduced mod p^e).
struct Element {
    FgModule ambient;
    std::vector<LocalScalar> coords;

    Element() = default;
    Element(FgModule m, std::vector<LocalScalar> c);

    bool is_zero() const;
    // Least N >= 1 with N*x = 0, or nullopt for infinite order.
    std::optional<Int> order() const;
    void reduce();
};

// Result of presenting Z_(p)^n / row-span(relations): the canonical module
// plus the coordinate transform from ambient generators to canonical
// coordinates (free slots first, torsion slots in descending-exponent order).
struct QuotientPresentation {
    FgModule module;
    // gen_count x n matrix: canonical coords of each ambient generator image.
    LocalMatrix to_canonical;

    std::vector<LocalScalar> map(const std::vector<LocalScalar>& ambient_coords) const;
    Element map_element(const std::vector<LocalScalar>& ambient_coords) const;
};

// relations: one row per relation, n_generators columns.
QuotientPresentation quotient_presentation_full(const Int& p, std::size_t n_generators,
                                                const LocalMatrix& relations);
FgModule quotient_presentation(const Int& p, std::size_t n_generators, const LocalMatrix& relations);

// p-component of a finitely generated abelian group given as free rank plus
// integer torsion orders.
FgModule p_component(int free_rank, const std::vector<Int>& torsion_orders, const Int& p);

struct SpaceSpec {
    bool is_sphere{false};
    int sphere_dim{0};  // n for S^n; ignored for suspended HP^m
};

// Minimal k such that pi_{d+k} of the k-fold suspension is stable.
int stable_range_bound(int d, const SpaceSpec& space);

// --- small linear-algebra toolkit over Z_(p) ---

// Basis of the kernel lattice of A (columns are the kernel generators).
LocalMatrix kernel_basis(const Int& p, const LocalMatrix& a);

// Solve A x = b over Z_(p); nullopt when unsolvable.
std::optional<std::vector<LocalScalar>> solve(const Int& p, const LocalMatrix& a,
                                              const std::vector<LocalScalar>& b);

}  // namespace hpstems::alg
