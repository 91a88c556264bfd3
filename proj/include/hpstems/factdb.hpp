#pragma once
// Versioned database of p-local sphere homotopy groups and the composition,
// suspension, Whitehead, bracket, order and constraint facts consumed by the
// derivation engine.  Fact files are JSONL documents (one document per
// entry / fact); normalized files round-trip byte-identically.

#include "hpstems/local_algebra.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hpstems::factdb {

using alg::FgModule;
using alg::Int;

struct MissingFact : std::runtime_error {
    explicit MissingFact(const std::string& what) : std::runtime_error(what) {}
};
struct DbError : std::runtime_error {
    explicit DbError(const std::string& what) : std::runtime_error(what) {}
};

struct Generator {
    std::string name;
    std::optional<unsigned> order_exp;  // order p^e; nullopt = infinite
    std::string family;                 // suspension family tag
    bool suspension = true;             // the class is a suspension element
};

struct GroupEntry {
    Int prime{2};
    int sphere{0};
    int degree{0};
    std::vector<Generator> gens;
    std::string note;
    bool from_stable = false;

    FgModule module() const;
    bool is_zero() const { return gens.empty(); }
    std::optional<std::size_t> find(const std::string& name) const;
};

// A linear combination of generators of one group entry.
struct ClassExpr {
    GroupEntry entry;
    std::vector<Int> coeffs;

    bool is_zero() const;
    // order of the class inside entry.module(); nullopt = infinite
    std::optional<Int> order() const;
    std::string str() const;
};

struct CompositionFact {
    Int prime;
    int left_sphere, left_degree;
    std::string left;
    std::string right;  // generator name in (left_degree, right_degree)
    int right_degree;
    std::string result;  // expression in pi_{right_degree}(S^{left_sphere}) or "0"
    std::string cite;
};

struct SuspensionFact {
    Int prime;
    int sphere, degree;  // source (n, m) -> (n+1, m+1)
    std::vector<std::pair<std::string, std::string>> images;
    bool epi = true, mono = false, iso = false;
    std::string cite;
};

struct WhiteheadFact {
    Int prime;
    std::string expr;        // e.g. "[i6,nu6]" or "[i8,i8]"
    int sphere, degree;      // where the value lives
    std::string value;       // expression, possibly a symbolic nonzero name
    bool symbolic_nonzero = false;
    std::string cite;
};

struct BracketFact {
    Int prime;
    std::string alpha, beta, gamma;
    std::string contains;  // named element known to lie in the bracket
    std::string indeterminacy;
    std::string cite;
};

// Order / divisibility / lift facts attached to goals (r, k).
struct GoalFact {
    Int prime;
    int r;
    int k_min, k_max;
    std::string kind;  // order_geq | order_exact_lift | order_geq_lift |
                       // no_element_of_order | left_divisible | lift_not_divisible |
                       // suspension_mono_from_prev | fibre_split
    Int value{0};
    std::string element;  // named element the fact is about (trace display)
    std::string cite;
};

struct SplitFact {
    Int prime;
    int k, degree;
    std::string cite;
};

struct StableHp2 {
    Int prime;
    int r;
    std::string module;
    std::vector<std::string> gens;
    std::string cite;
};

// High-level boundary facts for goals where the metastable BUND model does
// not apply (§6.7 range): explicit spans for im/ker of the boundary.
struct BoundarySpanFact {
    Int prime;
    int k, degree;       // the boundary pi_degree(S^{8+k}) -> pi_{degree-1}(F_k)
    std::string which;   // "image" (exprs in fibre names) or "kernel" (exprs in domain names)
    std::string branch;  // "" = unconditional, else hypothesis id
    std::vector<std::string> exprs;
    std::string cite;
};

struct Hypothesis {
    std::string id;
    std::vector<std::string> branches;
    std::string cite;
};

struct Violation {
    std::string what;
};

class FactDb {
  public:
    static FactDb load(const std::string& dir, bool extended = false);

    const std::string& version() const { return version_; }
    const std::string& version_hash() const { return hash_; }
    bool extended_loaded() const { return extended_; }

    // Sphere entry lookup; materializes stable entries, synthesizes the
    // trivial ranges m < n and m == n, errors on anything genuinely absent.
    GroupEntry lookup_group(const Int& p, int n, int m) const;
    bool has_group(const Int& p, int n, int m) const;

    // Parse an expression ("2 nubar6nu14 + zeta6", "0") against an entry.
    ClassExpr parse_expr(const GroupEntry& entry, const std::string& text) const;

    // Post-composition of a named class with a class expression.
    // left lives in pi_{left_degree}(S^{left_sphere}); arg in
    // pi_m(S^{left_degree}).  Result lives in pi_m(S^{left_sphere}).
    ClassExpr compose(const Int& p, int left_sphere, int left_degree, const std::string& left_name,
                      const ClassExpr& arg) const;
    // Non-throwing form: unresolved products come back symbolically, flagged.
    struct Composed {
        ClassExpr value;
        bool symbolic = false;
        std::string symbol;
    };
    Composed compose_or_symbolic(const Int& p, int left_sphere, int left_degree,
                                 const std::string& left_name, const ClassExpr& arg) const;
    // Composition with a compound left expression (valid when arg suspends).
    ClassExpr compose_expr(const ClassExpr& left, const ClassExpr& arg) const;

    // Suspension of a class expression by one dimension.
    ClassExpr suspend(const ClassExpr& x) const;
    bool suspension_is_epi(const Int& p, int n, int m) const;  // Sigma: pi_m(S^n) -> pi_{m+1}(S^{n+1})

    std::optional<WhiteheadFact> whitehead(const Int& p, const std::string& expr) const;
    const std::vector<BracketFact>& brackets() const { return brackets_; }

    std::vector<GoalFact> goal_facts(const Int& p, int r, int k) const;
    bool fibre_split(const Int& p, int k, int degree) const;
    std::optional<StableHp2> stable_hp2(const Int& p, int r) const;
    std::vector<BoundarySpanFact> boundary_spans(const Int& p, int k, int degree,
                                                 const std::string& branch) const;
    std::vector<Hypothesis> hypotheses() const { return hypotheses_; }

    // Indeterminacy of <alpha, beta, gamma>_n for sphere classes: the subgroup
    // [target]∘Sigma gamma + alpha∘[middle] of the target entry.  Returns the
    // subgroup as a list of class expressions plus a completeness flag.
    struct Indeterminacy {
        GroupEntry target;
        std::vector<ClassExpr> gens;
        bool complete = true;
        std::vector<std::string> flags;
    };
    Indeterminacy bracket_indeterminacy(const Int& p, int alpha_sphere, int alpha_degree,
                                        const std::string& alpha, int beta_degree,
                                        const Int& beta_coeff, const std::string& beta,
                                        int gamma_degree, const Int& gamma_coeff,
                                        const std::string& gamma) const;

    std::vector<Violation> validate() const;

    // Normalized serialization of one parsed file (for round-trip checks).
    static std::string normalize_file(const std::string& path);

  private:
    void index();
    GroupEntry materialize_stable(const Int& p, int n, int m) const;

    std::string version_ = "0";
    std::string hash_;
    bool extended_ = false;

    std::vector<GroupEntry> groups_;
    std::map<std::pair<int, int>, std::size_t> group_idx_p2_, group_idx_p3_;
    struct StableStem {
        Int prime;
        int stem;
        std::vector<Generator> gens;
    };
    std::vector<StableStem> stable_;
    std::vector<CompositionFact> compositions_;
    std::vector<SuspensionFact> suspensions_;
    std::vector<WhiteheadFact> whitehead_;
    std::vector<BracketFact> brackets_;
    std::vector<GoalFact> goal_facts_;
    std::vector<SplitFact> splits_;
    std::vector<StableHp2> stable_hp2_;
    std::vector<BoundarySpanFact> spans_;
    std::vector<Hypothesis> hypotheses_;

    friend class DbBuilder;
};

}  // namespace hpstems::factdb
