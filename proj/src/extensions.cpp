#include "hpstems/extensions.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace hpstems::ext {

using alg::int_pow;
using alg::QuotientPresentation;
using alg::quotient_presentation_full;

bool SolutionSet::contains(const FgModule& m) const {
    for (const auto& c : candidates)
        if (c.module == m) return true;
    return false;
}

std::vector<FgModule> SolutionSet::modules() const {
    std::vector<FgModule> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.module);
    return out;
}

std::string Constraint::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ContainsOrderGeq: os << "contains element of order >= " << value; break;
        case Kind::ContainsOrderExact: os << "contains element of order exactly " << value; break;
        case Kind::NoElementOfOrder: os << "no element of order " << value; break;
        case Kind::LiftOrderExact: os << "quotient generator lifts with order exactly " << value; break;
        case Kind::LiftOrderGeq: os << "quotient generator lifts with order >= " << value; break;
        case Kind::LiftNotDivisible: os << "quotient generator lifts to element not divisible by p"; break;
        case Kind::LeftDivisible: os << "image of subgroup generator #" << left_index << " divisible by p"; break;
        case Kind::ContainsSubgroup: os << "contains subgroup " << subgroup.str(); break;
        case Kind::TorsionOrderLeq: os << "torsion subgroup of order <= " << value; break;
    }
    return os.str();
}

FgModule ext_group(const FgModule& c, const FgModule& a) {
    if (c.free_rank > 0) throw ExtError("ext_group: C must be finite");
    if (c.prime != a.prime) throw ExtError("ext_group: prime mismatch");
    const Int& p = c.prime;
    std::vector<unsigned> exps;
    for (unsigned n : c.torsion) {
        // Ext(Z/p^n, Z_(p)) = Z/p^n per free summand
        for (int i = 0; i < a.free_rank; ++i) exps.push_back(n);
        // Ext(Z/p^n, Z/p^m) = Z/p^min(m, n)
        for (unsigned m : a.torsion) exps.push_back(std::min(m, n));
    }
    std::vector<unsigned> nonzero;
    for (unsigned e : exps)
        if (e > 0) nonzero.push_back(e);
    return FgModule(p, 0, std::move(nonzero));
}

namespace {

// Presentation of B = (A + Z_(p)<c>)/<(zeta(x), -p^n x)> with generator images
// tracked.  Generator order: A free gens, A torsion gens, then c.
struct BuiltExtension {
    QuotientPresentation pres;
    std::size_t a_gens;
    std::size_t c_index;

    std::vector<LocalScalar> gen_image(std::size_t i) const {
        std::vector<LocalScalar> e(pres.to_canonical.cols);
        e[i] = LocalScalar(1);
        return pres.map(e);
    }
};

BuiltExtension build_extension(const FgModule& a, const ExtRep& rep) {
    const Int& p = a.prime;
    std::size_t a_gens = a.gen_count();
    std::size_t n_gens = a_gens + 1;
    std::size_t n_rels = a.torsion.size() + 1;
    LocalMatrix rels(n_rels, n_gens);
    for (std::size_t i = 0; i < a.torsion.size(); ++i)
        rels.at(i, a.free_rank + i) = LocalScalar(int_pow(p, a.torsion[i]));
    for (std::size_t j = 0; j < a_gens; ++j) rels.at(a.torsion.size(), j) = LocalScalar(rep.zeta[j]);
    rels.at(a.torsion.size(), a_gens) = LocalScalar(-int_pow(p, rep.n));
    BuiltExtension out{quotient_presentation_full(p, n_gens, rels), a_gens, a_gens};
    return out;
}

void insert_candidate(std::map<FgModule, Candidate>& acc, const FgModule& b, const ExtRep& rep) {
    auto it = acc.find(b);
    if (it == acc.end())
        acc.emplace(b, Candidate{b, {rep}});
    else
        it->second.reps.push_back(rep);
}

// Single cyclic quotient step, enumerating unit-normalized representatives:
// per torsion factor the p-valuation of the zeta component, and a single
// effective free component (any free vector is unimodularly equivalent to
// p^v e_1).
std::map<FgModule, Candidate> classify_cyclic(const FgModule& a, unsigned n) {
    const Int& p = a.prime;
    std::vector<std::vector<Int>> comp_choices;  // per A generator
    for (int i = 0; i < a.free_rank; ++i) {
        std::vector<Int> vals{0};
        if (i == 0)
            for (unsigned v = 0; v < n; ++v) vals.push_back(int_pow(p, v));
        comp_choices.push_back(std::move(vals));
    }
    for (unsigned m : a.torsion) {
        std::vector<Int> vals{0};
        unsigned t = std::min(m, n);
        for (unsigned v = 0; v < t; ++v) vals.push_back(int_pow(p, v));
        comp_choices.push_back(std::move(vals));
    }

    std::map<FgModule, Candidate> acc;
    std::vector<std::size_t> idx(comp_choices.size(), 0);
    while (true) {
        ExtRep rep;
        rep.n = n;
        rep.zeta.resize(comp_choices.size());
        for (std::size_t i = 0; i < idx.size(); ++i) rep.zeta[i] = comp_choices[i][idx[i]];
        insert_candidate(acc, build_extension(a, rep).pres.module, rep);
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < comp_choices[i].size()) break;
            idx[i] = 0;
        }
        if (i == idx.size()) break;
        if (comp_choices.empty()) break;
    }
    if (comp_choices.empty()) {
        ExtRep rep;
        rep.n = n;
        insert_candidate(acc, build_extension(a, rep).pres.module, rep);
    }
    return acc;
}

void check_shape(const ExtensionProblem& p) {
    if (p.left.prime != p.right.prime) throw ExtError("extension problem across primes");
    if (p.right.free_rank > 0)
        throw ExtError("unsupported shape: quotient module " + p.right.str() + " has a free part");
}

}  // namespace

SolutionSet classify_extensions(const ExtensionProblem& p) {
    check_shape(p);
    SolutionSet out;
    if (p.right.is_zero()) {
        out.candidates.push_back(Candidate{p.left, {}});
        return out;
    }
    std::vector<unsigned> factors(p.right.torsion);
    // iterate one cyclic factor at a time; cross-product of intermediate sets
    std::map<FgModule, Candidate> current;
    current.emplace(p.left, Candidate{p.left, {}});
    bool single_step = factors.size() == 1;
    for (unsigned n : factors) {
        std::map<FgModule, Candidate> next;
        for (const auto& [mod, cand] : current) {
            auto step = classify_cyclic(mod, n);
            for (auto& [b, c] : step) {
                if (single_step)
                    for (const auto& r : c.reps) insert_candidate(next, b, r);
                else
                    next.emplace(b, Candidate{b, {}});
            }
        }
        current = std::move(next);
    }
    if (!single_step)
        out.notes.push_back("beyond-paper: quotient with several cyclic factors handled by iterated "
                            "one-factor extensions");
    for (auto& [mod, cand] : current) out.candidates.push_back(cand);
    return out;
}

SolutionSet brute_force_oracle(const ExtensionProblem& p) {
    check_shape(p);
    const Int& prime = p.left.prime;
    Int c_order = p.right.torsion_order();
    Int a_tors = p.left.torsion_order();
    Int guard = int_pow(prime, 3);
    if (c_order > guard || a_tors > guard) throw ExtError("oracle size guard exceeded");
    if (p.left.free_rank > 2) throw ExtError("oracle size guard exceeded (free rank)");

    SolutionSet out;
    std::map<FgModule, Candidate> current;
    current.emplace(p.left, Candidate{p.left, {}});
    bool single_step = p.right.torsion.size() == 1;
    for (unsigned n : p.right.torsion) {
        std::map<FgModule, Candidate> next;
        Int pn = int_pow(prime, n);
        for (const auto& [mod, cand] : current) {
            // all zeta in A/p^n A, componentwise
            std::vector<Int> limits;
            for (int i = 0; i < mod.free_rank; ++i) limits.push_back(pn);
            for (unsigned m : mod.torsion) limits.push_back(int_pow(prime, std::min(m, n)));
            std::vector<Int> zeta(limits.size(), 0);
            while (true) {
                ExtRep rep{n, zeta};
                FgModule b = build_extension(mod, rep).pres.module;
                if (single_step)
                    insert_candidate(next, b, rep);
                else
                    next.emplace(b, Candidate{b, {}});
                std::size_t i = 0;
                for (; i < zeta.size(); ++i) {
                    zeta[i] += 1;
                    if (zeta[i] < limits[i]) break;
                    zeta[i] = 0;
                }
                if (i == zeta.size()) break;
                if (zeta.empty()) break;
            }
            if (zeta.empty() && limits.empty()) {
                ExtRep rep{n, {}};
                insert_candidate(next, build_extension(mod, rep).pres.module, rep);
            }
        }
        current = std::move(next);
    }
    for (auto& [mod, cand] : current) out.candidates.push_back(cand);
    return out;
}

std::vector<FgModule> lemma28_closed_form(const Int& p, unsigned m, unsigned n) {
    unsigned t = std::min(m, n);
    std::set<FgModule> acc;
    // B = Z/p^m + Z/p^i + Z_(p), 0 <= i <= t-1
    for (unsigned i = 0; i + 1 <= t; ++i) {
        std::vector<unsigned> exps{m};
        if (i > 0) exps.push_back(i);
        acc.insert(FgModule(p, 1, exps));
    }
    // B = Z/p^{m+i-j} + Z/p^j + Z_(p), 0 <= j <= i <= n, j <= t
    for (unsigned i = 0; i <= n; ++i)
        for (unsigned j = 0; j <= std::min(i, t); ++j) {
            std::vector<unsigned> exps;
            if (m + i - j > 0) exps.push_back(m + i - j);
            if (j > 0) exps.push_back(j);
            acc.insert(FgModule(p, 1, exps));
        }
    return std::vector<FgModule>(acc.begin(), acc.end());
}

namespace {

bool module_level_pass(const Constraint& c, const FgModule& b) {
    switch (c.kind) {
        case Constraint::Kind::ContainsOrderGeq:
        case Constraint::Kind::ContainsOrderExact:
            return b.max_torsion_order() >= c.value;
        case Constraint::Kind::NoElementOfOrder:
            return b.max_torsion_order() < c.value;
        case Constraint::Kind::ContainsSubgroup:
            return b.contains_subgroup(c.subgroup);
        case Constraint::Kind::TorsionOrderLeq:
            return b.torsion_order() <= c.value;
        default:
            return true;
    }
}

bool is_presentation_kind(Constraint::Kind k) {
    return k == Constraint::Kind::LiftOrderExact || k == Constraint::Kind::LiftOrderGeq ||
           k == Constraint::Kind::LiftNotDivisible || k == Constraint::Kind::LeftDivisible;
}

bool coords_divisible(const std::vector<LocalScalar>& coords, const Int& p) {
    for (const auto& c : coords)
        if (!c.is_zero() && c.val(p) < 1) return false;
    return true;
}

// Enumerate the lifts of the C generator inside B (realized by `rep`),
// restricted to finite-order lifts plus at most one infinite witness.
struct LiftScan {
    bool has_infinite = false;
    std::vector<alg::Element> finite;
    bool any_not_divisible = false;
};

LiftScan scan_lifts(const FgModule& a, const ExtRep& rep) {
    const Int& p = a.prime;
    BuiltExtension built = build_extension(a, rep);
    const FgModule& b = built.pres.module;
    auto c_img = built.gen_image(built.c_index);

    std::vector<std::vector<LocalScalar>> tor_imgs;
    std::vector<Int> tor_orders;
    for (std::size_t i = 0; i < a.torsion.size(); ++i) {
        tor_imgs.push_back(built.gen_image(a.free_rank + i));
        tor_orders.push_back(int_pow(p, a.torsion[i]));
    }
    std::vector<std::vector<LocalScalar>> free_imgs;
    for (int i = 0; i < a.free_rank; ++i) free_imgs.push_back(built.gen_image(i));

    LiftScan scan;
    if (a.free_rank > 0 || b.free_rank > 0) scan.has_infinite = b.free_rank > 0;

    std::vector<Int> t(a.torsion.size(), 0);
    while (true) {
        std::vector<LocalScalar> x = c_img;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j)
                x[j] = x[j] + LocalScalar(t[i]) * tor_imgs[i][j];
        // cancel the free coordinates with A's free generators, if possible
        bool ok = true;
        if (b.free_rank > 0) {
            LocalMatrix fm(static_cast<std::size_t>(b.free_rank), free_imgs.size());
            for (std::size_t j = 0; j < free_imgs.size(); ++j)
                for (int i = 0; i < b.free_rank; ++i) fm.at(i, j) = free_imgs[j][i];
            std::vector<LocalScalar> rhs(b.free_rank);
            for (int i = 0; i < b.free_rank; ++i) rhs[i] = -x[i];
            auto sol = alg::solve(p, fm, rhs);
            if (!sol) {
                ok = false;
            } else {
                for (std::size_t j = 0; j < free_imgs.size(); ++j)
                    for (std::size_t i = 0; i < x.size(); ++i)
                        x[i] = x[i] + (*sol)[j] * free_imgs[j][i];
            }
        }
        if (ok) {
            alg::Element e(b, x);
            if (!coords_divisible(e.coords, p)) scan.any_not_divisible = true;
            scan.finite.push_back(std::move(e));
        }
        std::size_t i = 0;
        for (; i < t.size(); ++i) {
            t[i] += 1;
            if (t[i] < tor_orders[i]) break;
            t[i] = 0;
        }
        if (i == t.size()) break;
        if (t.empty()) break;
    }
    // without free cancellation, a raw lift witnesses non-divisibility too
    {
        BuiltExtension bb = build_extension(a, rep);
        alg::Element raw(bb.pres.module, bb.gen_image(bb.c_index));
        if (!coords_divisible(raw.coords, p)) scan.any_not_divisible = true;
    }
    return scan;
}

bool presentation_pass(const Constraint& c, const FgModule& a, const Candidate& cand) {
    if (cand.reps.empty())
        throw ExtError("unsupported shape: presentation-level constraint on an iterated extension");
    for (const auto& rep : cand.reps) {
        if (c.kind == Constraint::Kind::LeftDivisible) {
            BuiltExtension built = build_extension(a, rep);
            if (c.left_index >= built.a_gens) throw ExtError("left generator index out of range");
            auto img = built.gen_image(c.left_index);
            if (coords_divisible(img, a.prime)) return true;
            continue;
        }
        LiftScan scan = scan_lifts(a, rep);
        switch (c.kind) {
            case Constraint::Kind::LiftOrderExact: {
                for (const auto& e : scan.finite) {
                    auto o = e.order();
                    if (o && *o == c.value) return true;
                }
                break;
            }
            case Constraint::Kind::LiftOrderGeq: {
                if (scan.has_infinite) return true;
                for (const auto& e : scan.finite) {
                    auto o = e.order();
                    if (o && *o >= c.value) return true;
                }
                break;
            }
            case Constraint::Kind::LiftNotDivisible:
                if (scan.any_not_divisible) return true;
                break;
            default:
                return true;
        }
    }
    return false;
}

}  // namespace

SolutionSet solve_with_constraints(const ExtensionProblem& p, const std::vector<Constraint>& cs) {
    SolutionSet all = classify_extensions(p);
    SolutionSet out;
    out.notes = all.notes;
    for (const auto& cand : all.candidates) {
        bool keep = true;
        for (const auto& c : cs) {
            if (!module_level_pass(c, cand.module)) {
                keep = false;
                break;
            }
            if (is_presentation_kind(c.kind) && !presentation_pass(c, p.left, cand)) {
                keep = false;
                break;
            }
        }
        if (keep) out.candidates.push_back(cand);
    }
    if (out.candidates.empty()) {
        std::ostringstream os;
        os << "inconsistent facts: no extension 0 -> " << p.left.str() << " -> B -> " << p.right.str()
           << " -> 0 satisfies";
        for (const auto& c : cs) os << " [" << c.describe() << "]";
        throw InconsistentFacts(os.str());
    }
    return out;
}

}  // namespace hpstems::ext
