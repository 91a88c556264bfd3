#include "hpstems/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace hpstems::engine {

using alg::int_pow;
using alg::kernel_basis;
using alg::quotient_presentation_full;
using ext::Constraint;
using factdb::ClassExpr;
using factdb::GroupEntry;
using factdb::MissingFact;

std::string NamedModule::str() const {
    if (mod.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < mod.free_rank; ++i) {
        if (!first) os << " + ";
        os << "Z(" << mod.prime << ")<" << names[i] << ">";
        first = false;
    }
    for (std::size_t t = 0; t < mod.torsion.size(); ++t) {
        if (!first) os << " + ";
        os << "Z/" << int_pow(mod.prime, mod.torsion[t]) << "<" << names[mod.free_rank + t] << ">";
        first = false;
    }
    return os.str();
}

NamedModule NamedModule::of(const FgModule& m, std::vector<std::string> names) {
    if (names.size() != m.gen_count()) throw EngineError("NamedModule name count mismatch");
    return NamedModule{m, std::move(names)};
}

int Trace::add(const std::string& rule, const std::string& inputs, const std::string& output,
               const std::string& cite) {
    int id = static_cast<int>(steps_.size()) + 1;
    steps_.push_back({id, rule, inputs, output, cite});
    return id;
}

std::string Trace::render() const {
    std::ostringstream os;
    for (const auto& s : steps_)
        os << s.id << " | " << s.rule << " | " << s.inputs << " | " << s.output << " | " << s.cite
           << "\n";
    return os.str();
}

std::string Derivation::trace() const {
    std::ostringstream os;
    for (const auto& s : steps)
        os << s.id << " | " << s.rule << " | " << s.inputs << " | " << s.output << " | " << s.cite
           << "\n";
    return os.str();
}

namespace {

std::string coords_str(const std::vector<LocalScalar>& v, const std::vector<std::string>& names) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_zero()) continue;
        if (!first) os << " + ";
        if (!(v[i].num == 1 && v[i].den == 1)) os << v[i].str() << "*";
        os << names[i];
        first = false;
    }
    if (first) return "0";
    return os.str();
}

std::vector<LocalScalar> expr_coords(const ClassExpr& e) {
    std::vector<LocalScalar> out(e.coeffs.size());
    for (std::size_t i = 0; i < e.coeffs.size(); ++i) out[i] = LocalScalar(e.coeffs[i]);
    return out;
}

// relation lattice columns of a canonical module (torsion generators only)
LocalMatrix relation_columns(const FgModule& m) {
    LocalMatrix r(m.gen_count(), m.torsion.size());
    for (std::size_t t = 0; t < m.torsion.size(); ++t)
        r.at(m.free_rank + t, t) = LocalScalar(int_pow(m.prime, m.torsion[t]));
    return r;
}

std::vector<std::string> entry_names(const GroupEntry& e, const std::string& prefix) {
    // canonical order: free gens first (listed order), then torsion gens by
    // descending order exponent (stable on the listed order)
    std::vector<std::string> free_names, tor_names;
    std::vector<unsigned> tor_exps;
    for (const auto& g : e.gens) {
        if (!g.order_exp)
            free_names.push_back(prefix + g.name);
        else {
            tor_names.push_back(prefix + g.name);
            tor_exps.push_back(*g.order_exp);
        }
    }
    std::vector<std::size_t> order(tor_names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tor_exps[a] > tor_exps[b]; });
    std::vector<std::string> out = free_names;
    for (std::size_t i : order) out.push_back(tor_names[i]);
    return out;
}

// permutation taking entry-listed coordinates to canonical coordinates
std::vector<std::size_t> entry_perm(const GroupEntry& e) {
    std::vector<std::size_t> free_idx, tor_idx;
    std::vector<unsigned> tor_exps;
    for (std::size_t i = 0; i < e.gens.size(); ++i) {
        if (!e.gens[i].order_exp)
            free_idx.push_back(i);
        else {
            tor_idx.push_back(i);
            tor_exps.push_back(*e.gens[i].order_exp);
        }
    }
    std::vector<std::size_t> order(tor_idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return tor_exps[a] > tor_exps[b]; });
    std::vector<std::size_t> perm;  // perm[c] = entry index feeding canonical slot c
    for (std::size_t i : free_idx) perm.push_back(i);
    for (std::size_t i : order) perm.push_back(tor_idx[i]);
    return perm;
}

std::vector<LocalScalar> permute_expr(const GroupEntry& e, const ClassExpr& x) {
    auto perm = entry_perm(e);
    std::vector<LocalScalar> out(perm.size());
    for (std::size_t c = 0; c < perm.size(); ++c) out[c] = LocalScalar(x.coeffs[perm[c]]);
    return out;
}

Int module_torsion_size(const FgModule& m) { return m.torsion_order(); }

}  // namespace

NamedModule span_subgroup(const FgModule& ambient, const std::vector<std::string>& ambient_names,
                          const std::vector<std::vector<LocalScalar>>& span_in) {
    const Int& p = ambient.prime;
    if (span_in.empty()) return NamedModule::of(FgModule::zero(p), {});
    // unit-normalize each span vector for stable display (sign of the first
    // nonzero coordinate positive)
    std::vector<std::vector<LocalScalar>> span = span_in;
    for (auto& v : span)
        for (const auto& c : v) {
            if (c.is_zero()) continue;
            if (c.num < 0)
                for (auto& x : v) x = -x;
            break;
        }
    std::size_t g = ambient.gen_count();
    LocalMatrix rel = relation_columns(ambient);
    LocalMatrix combined(g, span.size() + rel.cols);
    for (std::size_t j = 0; j < span.size(); ++j)
        for (std::size_t i = 0; i < g; ++i) combined.at(i, j) = span[j][i];
    for (std::size_t j = 0; j < rel.cols; ++j)
        for (std::size_t i = 0; i < g; ++i) combined.at(i, span.size() + j) = rel.at(i, j);
    LocalMatrix ker = kernel_basis(p, combined);
    // relations on the span generators = projections of the kernel
    LocalMatrix rels(ker.cols, span.size());
    for (std::size_t r = 0; r < ker.cols; ++r)
        for (std::size_t j = 0; j < span.size(); ++j) rels.at(r, j) = ker.at(j, r);
    auto pres = quotient_presentation_full(p, span.size(), rels);
    // name canonical generators through their ambient expressions
    std::vector<std::string> names;
    for (std::size_t c = 0; c < pres.module.gen_count(); ++c) {
        // canonical gen c corresponds to a combination of span vectors; find a
        // span vector mapping onto it with unit coefficient for display
        std::string nm;
        for (std::size_t j = 0; j < span.size() && nm.empty(); ++j) {
            auto img = pres.map(
                [&] {
                    std::vector<LocalScalar> e(span.size());
                    e[j] = LocalScalar(1);
                    return e;
                }());
            bool hit = !img[c].is_zero() && img[c].is_unit(p);
            for (std::size_t c2 = 0; c2 < img.size() && hit; ++c2)
                if (c2 != c && !img[c2].is_zero()) hit = false;
            if (hit) nm = coords_str(span[j], ambient_names);
        }
        if (nm.empty()) nm = "s" + std::to_string(c + 1);
        names.push_back(nm);
    }
    return NamedModule::of(pres.module, names);
}

QuotientResult quotient_by(const FgModule& ambient, const std::vector<std::string>& ambient_names,
                           const std::vector<std::vector<LocalScalar>>& span) {
    const Int& p = ambient.prime;
    std::size_t g = ambient.gen_count();
    LocalMatrix rel = relation_columns(ambient);
    LocalMatrix rows(rel.cols + span.size(), g);
    for (std::size_t j = 0; j < rel.cols; ++j)
        for (std::size_t i = 0; i < g; ++i) rows.at(j, i) = rel.at(i, j);
    for (std::size_t s = 0; s < span.size(); ++s)
        for (std::size_t i = 0; i < g; ++i) rows.at(rel.cols + s, i) = span[s][i];
    auto pres = quotient_presentation_full(p, g, rows);
    // display names: prefer an ambient generator mapping straight onto a slot
    std::vector<std::string> names(pres.module.gen_count());
    for (std::size_t c = 0; c < names.size(); ++c) {
        for (std::size_t j = 0; j < g && names[c].empty(); ++j) {
            std::vector<LocalScalar> e(g);
            e[j] = LocalScalar(1);
            auto img = pres.map(e);
            bool hit = !img[c].is_zero() && img[c].is_unit(p);
            for (std::size_t c2 = 0; c2 < img.size() && hit; ++c2)
                if (c2 != c && !img[c2].is_zero()) hit = false;
            if (hit) names[c] = ambient_names[j];
        }
        if (names[c].empty()) names[c] = "q" + std::to_string(c + 1);
    }
    QuotientResult out;
    out.module = NamedModule::of(pres.module, names);
    out.map = pres.to_canonical;
    return out;
}

namespace {

std::vector<LocalScalar> apply_map(const LocalMatrix& m, const std::vector<LocalScalar>& x) {
    std::vector<LocalScalar> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            if (!m.at(i, j).is_zero()) out[i] = out[i] + m.at(i, j) * x[j];
    return out;
}

}  // namespace

Engine::Fibre Engine::fibre_pi(int m, int k, const Int& p, Trace* tr) const {
    if (k < 1) throw EngineError("fibre_pi requires k >= 1");
    int n = 4 + k, d = 10 + 2 * k, c = 11 + 2 * k;
    GroupEntry bottom = db_.lookup_group(p, n, m);

    Fibre out;
    out.bottom = bottom;
    out.m = m;
    out.k = k;

    // below the top cell the skeleton is just the bottom sphere
    if (m <= c - 2) {
        out.module = NamedModule::of(bottom.module(), entry_names(bottom, "j"));
        auto perm = entry_perm(bottom);
        LocalMatrix jm(perm.size(), perm.size());
        for (std::size_t cslot = 0; cslot < perm.size(); ++cslot)
            jm.at(cslot, perm[cslot]) = LocalScalar(1);
        out.j_map = jm;
        if (tr)
            tr->add("fibre-skeleton", "pi_" + std::to_string(m) + "(F_" + std::to_string(k) + ")",
                    out.module.str(), "cell model: top cell above degree");
        return out;
    }

    if (m > 3 * k + 16) throw EngineError("fibre_pi beyond the two-cell skeleton range");
    cw::TwoCellModel model = cw::skeleton_of_pinch_fibre(db_, k, p);
    if (model.symbolic)
        throw MissingFact("fibre skeleton attaching class for F_" + std::to_string(k) +
                          " only known symbolically: " + model.attach_name);

    if (model.wedge) {
        GroupEntry top = db_.lookup_group(p, c, m);
        GroupEntry cross = db_.lookup_group(p, n + c - 1, m);
        if (m >= 2 * n + c - 2 || m >= n + 2 * c - 2)
            throw EngineError("fibre_pi: weight-3 Hilton terms would enter");
        FgModule mod = bottom.module().direct_sum(top.module()).direct_sum(cross.module());
        // direct_sum keeps canonical order; rebuild names by re-deriving slots
        std::vector<std::string> nm;
        auto bn = entry_names(bottom, "j");
        auto tn = entry_names(top, "");
        std::vector<std::string> xn;
        for (const auto& g : entry_names(cross, ""))
            xn.push_back("[j,j']o" + g);
        // canonical order: free parts then torsion descending; assemble manually
        struct Slot {
            std::string name;
            std::optional<unsigned> exp;
            int src;              // 0 bottom, 1 top, 2 cross
            std::size_t src_slot;  // canonical slot within the part
        };
        std::vector<Slot> slots;
        auto push_part = [&](const GroupEntry& e, const std::vector<std::string>& names, int which) {
            FgModule pm = e.module();
            for (int i = 0; i < pm.free_rank; ++i)
                slots.push_back({names[i], std::nullopt, which, static_cast<std::size_t>(i)});
            for (std::size_t t = 0; t < pm.torsion.size(); ++t)
                slots.push_back({names[pm.free_rank + t], pm.torsion[t], which,
                                 static_cast<std::size_t>(pm.free_rank) + t});
        };
        push_part(bottom, bn, 0);
        push_part(top, tn, 1);
        push_part(cross, xn, 2);
        std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
            if (!a.exp != !b.exp) return !a.exp;  // free first
            if (!a.exp) return false;
            return *a.exp > *b.exp;
        });
        for (auto& s : slots) nm.push_back(s.name);
        out.module = NamedModule::of(mod, nm);
        // j-map: bottom entry generators into the assembled module
        auto perm = entry_perm(bottom);
        LocalMatrix jm(mod.gen_count(), bottom.gens.size());
        for (std::size_t cslot = 0; cslot < slots.size(); ++cslot)
            if (slots[cslot].src == 0) jm.at(cslot, perm[slots[cslot].src_slot]) = LocalScalar(1);
        out.j_map = jm;
        if (tr)
            tr->add("fibre-wedge",
                    "sk(F_" + std::to_string(k) + ") = S^" + std::to_string(n) + " v S^" + std::to_string(c),
                    out.module.str(), "wedge skeleton + Hilton");
        return out;
    }

    // two-cell model: PISK sequence through the skeleton
    if (m > n + d - 2) throw EngineError("fibre_pi: second James cell interferes");
    GroupEntry src_im = db_.lookup_group(p, d, m);
    if (!db_.suspension_is_epi(p, d, m))
        throw MissingFact("suspension epi fact needed for S^" + std::to_string(d) + " degree " +
                          std::to_string(m));
    std::vector<std::vector<LocalScalar>> im_span;
    std::vector<std::string> im_desc;
    for (std::size_t gi = 0; gi < src_im.gens.size(); ++gi) {
        ClassExpr arg{src_im, std::vector<Int>(src_im.gens.size(), 0)};
        arg.coeffs[gi] = 1;
        ClassExpr val = db_.compose_expr(model.attach, arg);
        if (val.is_zero()) continue;
        im_span.push_back(permute_expr(val.entry, val));
        im_desc.push_back(model.attach_name + " o " + src_im.gens[gi].name + " = " + val.str());
    }
    auto names = entry_names(bottom, "j");
    QuotientResult cok = quotient_by(bottom.module(), names, im_span);

    GroupEntry top = db_.lookup_group(p, c, m);
    NamedModule kerpart = NamedModule::of(FgModule::zero(p), {});
    std::vector<std::string> ker_names;
    if (!top.is_zero()) {
        GroupEntry src2 = db_.lookup_group(p, d, m - 1);
        if (!db_.suspension_is_epi(p, d, m - 1))
            throw MissingFact("suspension epi fact needed for S^" + std::to_string(d) + " degree " +
                              std::to_string(m - 1));
        GroupEntry tgt = db_.lookup_group(p, n, m - 1);
        // kernel of x -> attach o x as a map of groups
        std::size_t gs = src2.gens.size();
        FgModule tmod = tgt.module();
        LocalMatrix phi(tmod.gen_count(), gs);
        for (std::size_t gi = 0; gi < gs; ++gi) {
            ClassExpr arg{src2, std::vector<Int>(src2.gens.size(), 0)};
            arg.coeffs[gi] = 1;
            ClassExpr val = db_.compose_expr(model.attach, arg);
            auto coords = permute_expr(tgt, val);
            for (std::size_t i = 0; i < coords.size(); ++i) phi.at(i, gi) = coords[i];
        }
        LocalMatrix rel = relation_columns(tmod);
        LocalMatrix combined(tmod.gen_count(), gs + rel.cols);
        for (std::size_t j = 0; j < gs; ++j)
            for (std::size_t i = 0; i < tmod.gen_count(); ++i) combined.at(i, j) = phi.at(i, j);
        for (std::size_t j = 0; j < rel.cols; ++j)
            for (std::size_t i = 0; i < tmod.gen_count(); ++i)
                combined.at(i, gs + j) = rel.at(i, j);
        LocalMatrix kerlat = kernel_basis(p, combined);
        // also the relation lattice of the source group itself
        std::vector<std::vector<LocalScalar>> srcvecs;
        for (std::size_t col = 0; col < kerlat.cols; ++col) {
            std::vector<LocalScalar> v(gs);
            bool nonzero = false;
            for (std::size_t i = 0; i < gs; ++i) {
                v[i] = kerlat.at(i, col);
                nonzero = nonzero || !v[i].is_zero();
            }
            if (nonzero) srcvecs.push_back(std::move(v));
        }
        // suspend each kernel vector into pi_m(S^{d+1}) = pi_m(S^c)
        std::vector<std::vector<LocalScalar>> ker_span;
        auto top_perm_names = entry_names(top, "");
        for (const auto& v : srcvecs) {
            ClassExpr e{src2, std::vector<Int>(src2.gens.size(), 0)};
            // clear denominators (unit scaling does not change the span)
            Int scale = 1;
            for (const auto& s : v) scale = scale / alg::int_gcd(scale, s.den) * s.den;
            for (std::size_t i = 0; i < v.size(); ++i) {
                LocalScalar t = v[i] * LocalScalar(scale);
                if (t.den != 1) throw EngineError("kernel vector not integral after scaling");
                e.coeffs[i] = t.num;
            }
            ClassExpr sus = db_.suspend(e);
            if (sus.is_zero()) continue;
            ker_span.push_back(permute_expr(sus.entry, sus));
        }
        kerpart = span_subgroup(top.module(), top_perm_names, ker_span);
    }

    if (kerpart.mod.is_zero()) {
        out.module = cok.module;
        out.j_map = cok.map;
        if (tr)
            tr->add("fibre-pisk", "PISK(" + std::to_string(m) + "," + std::to_string(k) + ")",
                    out.module.str(), "two-cell skeleton, top kernel trivial");
        return out;
    }
    bool split = kerpart.mod.torsion.empty() || db_.fibre_split(p, k, m);
    if (cok.module.mod.is_zero()) {
        std::vector<std::string> nm;
        for (auto& s : kerpart.names) nm.push_back("bar(" + s + ")");
        out.module = NamedModule::of(kerpart.mod, nm);
        out.j_map = LocalMatrix(kerpart.mod.gen_count(), bottom.gens.size());
        if (tr)
            tr->add("fibre-pisk", "PISK(" + std::to_string(m) + "," + std::to_string(k) + ")",
                    out.module.str(), "two-cell skeleton, bottom part trivial");
        return out;
    }
    if (!split)
        throw MissingFact("fibre extension for pi_" + std::to_string(m) + "(F_" + std::to_string(k) +
                          ") unresolved (no split fact)");
    // assemble split: canonical order across both parts
    struct Slot {
        std::string name;
        std::optional<unsigned> exp;
        bool from_cok;
        std::size_t idx;
    };
    std::vector<Slot> slots;
    for (int i = 0; i < cok.module.mod.free_rank; ++i)
        slots.push_back({cok.module.names[i], std::nullopt, true, static_cast<std::size_t>(i)});
    for (int i = 0; i < kerpart.mod.free_rank; ++i)
        slots.push_back({"bar(" + kerpart.names[i] + ")", std::nullopt, false, static_cast<std::size_t>(i)});
    for (std::size_t t = 0; t < cok.module.mod.torsion.size(); ++t)
        slots.push_back({cok.module.names[cok.module.mod.free_rank + t], cok.module.mod.torsion[t], true,
                         static_cast<std::size_t>(cok.module.mod.free_rank) + t});
    for (std::size_t t = 0; t < kerpart.mod.torsion.size(); ++t)
        slots.push_back({"bar(" + kerpart.names[kerpart.mod.free_rank + t] + ")", kerpart.mod.torsion[t],
                         false, static_cast<std::size_t>(kerpart.mod.free_rank) + t});
    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (!a.exp != !b.exp) return !a.exp;
        if (!a.exp) return false;
        return *a.exp > *b.exp;
    });
    FgModule total = cok.module.mod.direct_sum(kerpart.mod);
    std::vector<std::string> nm;
    for (auto& s : slots) nm.push_back(s.name);
    out.module = NamedModule::of(total, nm);
    out.j_map = LocalMatrix(total.gen_count(), bottom.gens.size());
    for (std::size_t cslot = 0; cslot < slots.size(); ++cslot)
        if (slots[cslot].from_cok)
            for (std::size_t j = 0; j < bottom.gens.size(); ++j)
                out.j_map.at(cslot, j) = cok.map.at(slots[cslot].idx, j);
    if (tr)
        tr->add("fibre-pisk-split", "PISK(" + std::to_string(m) + "," + std::to_string(k) + ")",
                out.module.str(),
                kerpart.mod.torsion.empty() ? "free right end splits" : "split fact");
    return out;
}

namespace {

GroupEntry pseudo_entry(const Int& p, const NamedModule& m) {
    GroupEntry pseudo;
    pseudo.prime = p;
    for (std::size_t i = 0; i < m.names.size(); ++i) {
        factdb::Generator g;
        g.name = m.names[i];
        if (static_cast<int>(i) < m.mod.free_rank)
            g.order_exp = std::nullopt;
        else
            g.order_exp = m.mod.torsion[i - m.mod.free_rank];
        pseudo.gens.push_back(g);
    }
    return pseudo;
}

}  // namespace

// image span of d_{k*m} inside pi_{m-1}(F_k), from the composite model
// d(Sigma x) = j((Sigma^k y) o x) of the BUND diagrams.
NamedModule Engine::boundary_cok(int m, int k, const Int& p, const std::string& branch,
                                 Trace* tr) const {
    Fibre fib = fibre_pi(m - 1, k, p, tr);
    std::vector<std::vector<LocalScalar>> im_span;
    bool have_spans = false;
    for (const auto& s : db_.boundary_spans(p, k, m, branch)) {
        if (s.which != "image") continue;
        have_spans = true;
        GroupEntry pseudo = pseudo_entry(p, fib.module);
        for (const auto& e : s.exprs) {
            ClassExpr ce = db_.parse_expr(pseudo, e);
            std::vector<LocalScalar> v(ce.coeffs.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = LocalScalar(ce.coeffs[i]);
            im_span.push_back(v);
        }
        if (tr) tr->add("boundary-span-fact", "image of d_{" + std::to_string(k) + "*" + std::to_string(m) + "}", "(from facts)", s.cite);
    }
    if (!have_spans) {
        GroupEntry src = db_.lookup_group(p, 7 + k, m - 1);
        if (!db_.suspension_is_epi(p, 7 + k, m - 1))
            throw MissingFact("suspension epi fact needed for S^" + std::to_string(7 + k) +
                              " degree " + std::to_string(m - 1));
        std::string y = p == 2 ? "nu" + std::to_string(4 + k) : "alpha1(" + std::to_string(4 + k) + ")";
        for (std::size_t gi = 0; gi < src.gens.size(); ++gi) {
            ClassExpr arg{src, std::vector<Int>(src.gens.size(), 0)};
            arg.coeffs[gi] = 1;
            ClassExpr comp = db_.compose(p, 4 + k, 7 + k, y, arg);
            std::vector<LocalScalar> ecoords(comp.coeffs.size());
            for (std::size_t i = 0; i < comp.coeffs.size(); ++i) ecoords[i] = LocalScalar(comp.coeffs[i]);
            auto v = apply_map(fib.j_map, ecoords);
            if (tr)
                tr->add("boundary-image", y + " o " + src.gens[gi].name + " = " + comp.str(),
                        coords_str(v, fib.module.names),
                        "BUND(" + std::to_string(m) + "," + std::to_string(k) + ")");
            bool nz = false;
            for (auto& x : v) nz = nz || !x.is_zero();
            if (nz) im_span.push_back(v);
        }
    }
    QuotientResult q = quotient_by(fib.module.mod, fib.module.names, im_span);
    if (tr)
        tr->add("boundary-cok", "d_{" + std::to_string(k) + "*" + std::to_string(m) + "}",
                q.module.str(), "");
    return q.module;
}

NamedModule Engine::boundary_ker(int m, int k, const Int& p, const std::string& branch,
                                 Trace* tr) const {
    GroupEntry dom = db_.lookup_group(p, 8 + k, m);
    std::vector<std::vector<LocalScalar>> ker_span;
    bool have_spans = false;
    for (const auto& s : db_.boundary_spans(p, k, m, branch)) {
        if (s.which != "kernel") continue;
        have_spans = true;
        for (const auto& e : s.exprs) {
            ClassExpr ce = db_.parse_expr(dom, e);
            ker_span.push_back(permute_expr(dom, ce));
        }
        if (tr)
            tr->add("boundary-span-fact",
                    "kernel of d_{" + std::to_string(k) + "*" + std::to_string(m) + "}", "(from facts)",
                    s.cite);
    }
    if (!have_spans) {
        Fibre fib = fibre_pi(m - 1, k, p, tr);
        GroupEntry src = db_.lookup_group(p, 7 + k, m - 1);
        if (!db_.suspension_is_epi(p, 7 + k, m - 1))
            throw MissingFact("suspension epi fact needed for S^" + std::to_string(7 + k) +
                              " degree " + std::to_string(m - 1));
        std::string y = p == 2 ? "nu" + std::to_string(4 + k) : "alpha1(" + std::to_string(4 + k) + ")";
        std::size_t gs = src.gens.size();
        LocalMatrix phi(fib.module.mod.gen_count(), gs);
        for (std::size_t gi = 0; gi < gs; ++gi) {
            ClassExpr arg{src, std::vector<Int>(src.gens.size(), 0)};
            arg.coeffs[gi] = 1;
            ClassExpr comp = db_.compose(p, 4 + k, 7 + k, y, arg);
            std::vector<LocalScalar> ecoords(comp.coeffs.size());
            for (std::size_t i = 0; i < comp.coeffs.size(); ++i) ecoords[i] = LocalScalar(comp.coeffs[i]);
            auto v = apply_map(fib.j_map, ecoords);
            for (std::size_t i = 0; i < v.size(); ++i) phi.at(i, gi) = v[i];
        }
        LocalMatrix rel = relation_columns(fib.module.mod);
        LocalMatrix combined(fib.module.mod.gen_count(), gs + rel.cols);
        for (std::size_t j = 0; j < gs; ++j)
            for (std::size_t i = 0; i < combined.rows; ++i) combined.at(i, j) = phi.at(i, j);
        for (std::size_t j = 0; j < rel.cols; ++j)
            for (std::size_t i = 0; i < combined.rows; ++i) combined.at(i, gs + j) = rel.at(i, j);
        LocalMatrix kerlat = kernel_basis(p, combined);
        for (std::size_t col = 0; col < kerlat.cols; ++col) {
            ClassExpr e{src, std::vector<Int>(src.gens.size(), 0)};
            Int denlcm = 1;
            for (std::size_t i = 0; i < gs; ++i) {
                Int den = kerlat.at(i, col).den;
                denlcm = denlcm / alg::int_gcd(denlcm, den) * den;
            }
            bool nonzero = false;
            for (std::size_t i = 0; i < gs; ++i) {
                LocalScalar t = kerlat.at(i, col) * LocalScalar(denlcm);
                e.coeffs[i] = t.num;
                nonzero = nonzero || t.num != 0;
            }
            if (!nonzero) continue;
            ClassExpr sus = db_.suspend(e);
            if (sus.is_zero()) continue;
            ker_span.push_back(permute_expr(sus.entry, sus));
        }
    }
    NamedModule out = span_subgroup(dom.module(), entry_names(dom, ""), ker_span);
    if (tr)
        tr->add("boundary-ker", "d_{" + std::to_string(k) + "*" + std::to_string(m) + "}", out.str(),
                "");
    return out;
}

Engine::Boundary Engine::boundary_cok_ker(int m, int k, const Int& p, const std::string& branch,
                                          Trace* tr) const {
    Boundary out;
    out.m = m;
    out.k = k;
    out.cok = boundary_cok(m, k, p, branch, tr);
    out.ker = boundary_ker(m, k, p, branch, tr);
    return out;
}

void Engine::harvest_constraints(int r, int k, const Int& p, ShortData& sd, Trace& tr) const {
    for (const auto& f : db_.goal_facts(p, r, k)) {
        Constraint c;
        bool ok = true;
        if (f.kind == "order_geq") {
            c.kind = Constraint::Kind::ContainsOrderGeq;
            c.value = f.value;
        } else if (f.kind == "order_exact_lift") {
            c.kind = Constraint::Kind::LiftOrderExact;
            c.value = f.value;
        } else if (f.kind == "order_geq_lift") {
            c.kind = Constraint::Kind::LiftOrderGeq;
            c.value = f.value;
        } else if (f.kind == "no_element_of_order") {
            c.kind = Constraint::Kind::NoElementOfOrder;
            c.value = f.value;
        } else if (f.kind == "torsion_order_leq") {
            c.kind = Constraint::Kind::TorsionOrderLeq;
            c.value = f.value;
        } else if (f.kind == "lift_not_divisible") {
            c.kind = Constraint::Kind::LiftNotDivisible;
        } else if (f.kind == "left_divisible") {
            c.kind = Constraint::Kind::LeftDivisible;
            c.left_index = 0;
            for (std::size_t i = 0; i < sd.cok.names.size(); ++i)
                if (sd.cok.names[i] == f.element) c.left_index = i;
        } else if (f.kind == "suspension_mono_from_prev") {
            Derivation prev = derive_pi(r, k - 1, p);
            if (prev.status != Derivation::Status::Unique)
                throw EngineError("suspension-mono fact needs a unique result at k-1");
            c.kind = Constraint::Kind::ContainsSubgroup;
            c.subgroup = prev.result;
            tr.add("snake-mono", "Sigma: pi_" + std::to_string(r + k - 1) + " -> pi_" + std::to_string(r + k),
                   "contains " + prev.result.str(), f.cite);
        } else if (f.kind == "fibre_split") {
            ok = false;  // consumed by fibre_pi
        } else {
            throw EngineError("unknown goal fact kind: " + f.kind);
        }
        if (!ok) continue;
        sd.constraints.push_back(c);
        sd.constraint_cites.push_back(f.cite);
        tr.add("constraint", f.element.empty() ? "(goal fact)" : f.element, c.describe(), f.cite);
    }
}

Engine::ShortData Engine::assemble_short(int r, int k, const Int& p, const std::string& branch,
                                         Trace& tr) const {
    int m = r + k;
    NamedModule cok = boundary_cok(m + 1, k, p, branch, &tr);
    NamedModule ker = boundary_ker(m, k, p, branch, &tr);
    ShortData sd{cok, ker, {}, {}};
    tr.add("short-exact",
           "0 -> cok(d_{" + std::to_string(k) + "*" + std::to_string(m + 1) + "}) -> pi_" +
               std::to_string(m) + "(Sigma^" + std::to_string(k) + " HP2) -> Ker(d_{" +
               std::to_string(k) + "*" + std::to_string(m) + "}) -> 0",
           "cok = " + sd.cok.str() + "; ker = " + sd.ker.str(),
           "Short(" + std::to_string(m) + "," + std::to_string(k) +
               "); cok identified with i_k*(pi_" + std::to_string(m) + "(F_" + std::to_string(k) +
               ")) by the usual identification");
    return sd;
}

Derivation Engine::derive_pi(int r, int k, const Int& p, bool force_unstable) const {
    Derivation out;
    out.prime = p;
    out.r = r;
    out.k = k;
    out.db_hash = db_.version_hash();
    Trace tr;
    try {
        if (k < 0) throw EngineError("negative suspension count");
        if (k == 0) {
            GroupEntry a = db_.lookup_group(p, 11, r);
            GroupEntry b = db_.lookup_group(p, 3, r - 1);
            out.result = a.module().direct_sum(b.module());
            tr.add("k0-splitting", "pi_" + std::to_string(r) + "(HP2) = pi_" + std::to_string(r) +
                                       "(S^11) + pi_" + std::to_string(r - 1) + "(S^3)",
                   out.result.str(), "quaternionic fibration splitting");
            out.status = Derivation::Status::Unique;
            out.steps = tr.steps();
            return out;
        }
        int stable_k = alg::stable_range_bound(r, alg::SpaceSpec{false, 0});
        if (k >= stable_k && !force_unstable) {
            auto s = db_.stable_hp2(p, r);
            if (!s)
                throw MissingFact("missing stable fact for pi_" + std::to_string(r) + "^S(HP2) at p=" +
                                  (p == 2 ? std::string("2") : std::string("3")));
            out.result = FgModule::parse(p, s->module);
            tr.add("stable-range", "k >= " + std::to_string(stable_k), out.result.str(), s->cite);
            out.status = Derivation::Status::Unique;
            out.steps = tr.steps();
            return out;
        }

        // hypothesis branches?
        std::vector<std::string> branches{""};
        for (const auto& h : db_.hypotheses()) {
            bool relevant = false;
            for (const auto& b : h.branches) {
                for (const auto& s : db_.boundary_spans(p, k, r + k + 1, b))
                    if (s.branch == b) relevant = true;
                for (const auto& s : db_.boundary_spans(p, k, r + k, b))
                    if (s.branch == b) relevant = true;
            }
            if (relevant) {
                branches = h.branches;
                tr.add("hypothesis-split", h.id, std::to_string(h.branches.size()) + " branches", h.cite);
            }
        }

        auto resolve = [&](const ShortData& sd) -> std::vector<FgModule> {
            const FgModule& A = sd.cok.mod;
            FgModule C = sd.ker.mod;
            if (C.is_zero()) return {A};
            if (A.is_zero()) return {C};
            FgModule c_tors(p, 0, C.torsion);
            FgModule free_part = FgModule::free_module(p, C.free_rank);
            if (c_tors.is_zero()) {
                tr.add("split", "free right end", A.direct_sum(free_part).str(),
                       "projectivity of Z_(p)");
                return {A.direct_sum(free_part)};
            }
            ext::ExtensionProblem prob{A, c_tors};
            ext::SolutionSet sol = ext::solve_with_constraints(prob, sd.constraints);
            std::vector<FgModule> outs;
            for (auto& cand : sol.candidates) outs.push_back(cand.module.direct_sum(free_part));
            std::sort(outs.begin(), outs.end());
            outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
            return outs;
        };

        if (branches.size() == 1) {
            ShortData sd = assemble_short(r, k, p, branches[0], tr);
            harvest_constraints(r, k, p, sd, tr);
            auto cands = resolve(sd);
            if (cands.size() == 1) {
                out.status = Derivation::Status::Unique;
                out.result = cands[0];
                // exactness audit: |B_tors| * (index absorbed by the free part)
                // = |cok_tors| * |ker_tors|, ranks additive
                Int lhs = module_torsion_size(cands[0]);
                Int rhs = module_torsion_size(sd.cok.mod) * module_torsion_size(sd.ker.mod);
                int lrk = cands[0].free_rank;
                int rrk = sd.cok.mod.free_rank + sd.ker.mod.free_rank;
                bool ok = lrk == rrk && rhs % lhs == 0;
                if (ok) {
                    Int q = rhs / lhs;
                    while (q % p == 0) q /= p;
                    ok = q == 1 && (rhs == lhs || sd.cok.mod.free_rank > 0);
                }
                if (!ok) throw EngineError("exactness audit failed");
                tr.add("exactness-audit", "|B_tors| * p^absorbed = |cok_tors| * |ker_tors|",
                       lhs.str() + " * " + Int(rhs / lhs).str() + " (rank " + std::to_string(lrk) + ")",
                       "Short exact");
                tr.add("result", "pi_" + std::to_string(r + k) + "(Sigma^" + std::to_string(k) + " HP2)",
                       out.result.str(), "");
            } else {
                out.status = Derivation::Status::Ambiguous;
                out.candidates = cands;
                std::ostringstream os;
                for (auto& c : cands) os << "[" << c.str() << "] ";
                tr.add("result-ambiguous", "candidates", os.str(), "");
            }
        } else {
            for (const auto& b : branches) {
                ShortData sd = assemble_short(r, k, p, b, tr);
                harvest_constraints(r, k, p, sd, tr);
                Derivation::Branch br;
                br.label = b;
                br.cok = sd.cok.mod;
                br.ker = sd.ker.mod;
                try {
                    br.candidates = resolve(sd);
                } catch (const ext::ExtError&) {
                    // extension left open by the facts: record the SES only
                }
                out.branches.push_back(br);
                tr.add("branch", b, "0 -> " + sd.cok.str() + " -> pi -> " + sd.ker.str() + " -> 0", "");
            }
            out.status = Derivation::Status::Ambiguous;
        }
    } catch (const MissingFact& e) {
        out.status = Derivation::Status::MissingFact;
        out.missing = e.what();
        tr.add("missing-fact", "", e.what(), "");
    }
    out.steps = tr.steps();
    return out;
}

std::vector<factdb::Violation> consistency_checks(const SequenceInstance& inst) {
    std::vector<factdb::Violation> out;
    auto tsize = [](const FgModule& m) { return m.torsion_order(); };
    if (inst.nodes.size() == 3 && inst.nodes[0] && inst.nodes[1] && inst.nodes[2]) {
        const FgModule& a = *inst.nodes[0];
        const FgModule& b = *inst.nodes[1];
        const FgModule& c = *inst.nodes[2];
        if (tsize(a) * tsize(c) != tsize(b) || a.free_rank + c.free_rank != b.free_rank)
            out.push_back({"order mismatch in short exact sequence " + inst.tmpl + ": |" + a.str() +
                           "| * |" + c.str() + "| != |" + b.str() + "|"});
        else if (!b.contains_subgroup(a))
            out.push_back({"left module cannot embed in the middle of " + inst.tmpl});
    }
    if (inst.tmpl.rfind("COM", 0) == 0 && inst.nodes.size() == 4) {
        // COM(m,k,t): j and its suspension must be compatible; with the
        // bottom-cell inclusion both verticals are suspensions, so a mono j
        // needs room in the suspended fibre group
        if (inst.nodes[0] && inst.nodes[1] && inst.nodes[2] && inst.nodes[3]) {
            if (!inst.arrows.empty() && inst.arrows[0].mono.value_or(false)) {
                if (!inst.nodes[1]->contains_subgroup(*inst.nodes[0]))
                    out.push_back({"COM square: j flagged mono but the fibre group has no room"});
            }
            if (inst.nodes[0]->free_rank > 0 && inst.nodes[2]->free_rank == 0)
                out.push_back({"COM square: suspension of the bottom cell lost its free part"});
        }
    }
    if (inst.nodes.size() == 6 && inst.ladder_end_monos) {
        // snake lemma on a Short(m,k,t) ladder: monos on both ends force the
        // middle suspension to be mono
        if (inst.nodes[1] && inst.nodes[4] && !inst.nodes[4]->contains_subgroup(*inst.nodes[1]))
            out.push_back({"snake-lemma violation: middle suspension cannot be monomorphic in " +
                           inst.tmpl});
    }
    // zero-node propagation: with node z = 0, exactness forces the arrow into
    // node z-1 to be epi and the arrow out of node z+1 to be mono
    for (std::size_t z = 0; z < inst.nodes.size(); ++z) {
        if (!inst.nodes[z] || !inst.nodes[z]->is_zero()) continue;
        if (z >= 2 && z - 2 < inst.arrows.size()) {
            const auto& into_prev = inst.arrows[z - 2];
            if (into_prev.epi.has_value() && !*into_prev.epi)
                out.push_back({"exactness forces the arrow into the node before a zero to be epimorphic"});
        }
        if (z + 1 < inst.arrows.size()) {
            const auto& out_next = inst.arrows[z + 1];
            if (out_next.mono.has_value() && !*out_next.mono)
                out.push_back({"exactness forces the arrow out of the node after a zero to be monomorphic"});
        }
    }
    return out;
}

}  // namespace hpstems::engine
