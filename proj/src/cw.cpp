#include "hpstems/cw.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace hpstems::cw {

using alg::int_pow;
using factdb::ClassExpr;
using factdb::FactDb;
using factdb::GroupEntry;

std::string CellComplex::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i == 0) {
            os << "S^" << cells[i].dim;
            continue;
        }
        if (cells[i].attach.empty() || cells[i].attach == "0")
            os << " v S^" << cells[i].dim;
        else
            os << " u_{" << cells[i].attach << "} e^" << cells[i].dim;
    }
    return os.str();
}

std::vector<int> fibre_cell_dims(int n, int m, int cutoff) {
    if (!(2 <= n && n <= m)) throw CwError("fibre_cell_dims requires 2 <= n <= m");
    std::vector<int> dims;
    for (int d = n; d <= cutoff; d += m) dims.push_back(d);
    return dims;
}

int skeleton_filtration_level(int n, int m, int r) {
    if (!(2 <= n && n <= m)) throw CwError("skeleton level requires 2 <= n <= m");
    if (r < n) return 0;
    return (r - n) / m + 1;
}

GradedModP GradedModP::hp(int cells, const Int& p) {
    GradedModP h;
    h.prime = p;
    const char* names[] = {"x", "y", "z"};
    if (cells < 1 || cells > 3) throw CwError("hp: only HP^1..HP^3 shipped");
    for (int i = 0; i < cells; ++i) h.basis.emplace_back(names[i], 4 * (i + 1));
    h.p1.assign(h.basis.size(), {});
    if (p == 3) {
        // P^1 lowers degree by 4: P^1(y) = x, P^1(z) = -y.
        if (cells >= 2) h.p1[1] = {{Int(1), 0}};
        if (cells >= 3) h.p1[2] = {{Int(-1), 1}};
    }
    return h;
}

std::vector<int> GradedModP::degrees() const {
    std::vector<int> out;
    for (auto& [name, d] : basis) out.push_back(d);
    std::sort(out.begin(), out.end());
    return out;
}

GradedModP james_homology(const GradedModP& hx, const GradedModP& ha, int cutoff) {
    // basis: x (x) w where w is a word in the generators of H(A);
    // the loop-space tensor algebra contributes all words.
    GradedModP out;
    out.prime = hx.prime;
    struct Word {
        std::string name;
        int deg;
    };
    std::vector<Word> words{{"", 0}};
    for (std::size_t head = 0; head < words.size(); ++head) {
        Word w = words[head];
        for (auto& [gname, gdeg] : ha.basis) {
            // a word in H(Omega Sigma A) built from degree-(d-1) desuspensions
            int ndeg = w.deg + gdeg - 1;
            if (ndeg > cutoff) continue;
            words.push_back({w.name.empty() ? gname : w.name + "|" + gname, ndeg});
        }
    }
    for (auto& [xname, xdeg] : hx.basis)
        for (auto& w : words) {
            int d = xdeg + w.deg;
            if (d > cutoff) continue;
            out.basis.emplace_back(w.name.empty() ? xname : xname + "(x)" + w.name, d);
        }
    std::sort(out.basis.begin(), out.basis.end(),
              [](const auto& a, const auto& b) { return a.second < b.second || (a.second == b.second && a.first < b.first); });
    out.p1.assign(out.basis.size(), {});
    return out;
}

namespace {

Int mod_p(Int a, const Int& p) {
    a %= p;
    if (a < 0) a += p;
    return a;
}

}  // namespace

SmashSplit smash_square_split(const GradedModP& hx) {
    const Int& p = hx.prime;
    if (p == 2) throw CwError("smash_square_split needs an odd prime (the idempotents use 1/2)");
    std::size_t n = hx.basis.size();
    // basis of H(Sigma X ^ X): sigma(a_i (x) a_j), degree |a_i|+|a_j|+1
    struct Tens {
        std::size_t i, j;
        std::string name;
        int deg;
    };
    std::vector<Tens> tens;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            tens.push_back({i, j, "s(" + hx.basis[i].first + hx.basis[j].first + ")",
                            hx.basis[i].second + hx.basis[j].second + 1});
    auto index_of = [&](std::size_t i, std::size_t j) { return i * n + j; };

    // P^1 on a tensor by the Cartan formula, then restricted to each image.
    auto p1_of_tensor = [&](std::size_t i, std::size_t j) {
        std::vector<std::pair<Int, std::size_t>> out;
        for (auto& [c, t] : hx.p1[i]) out.emplace_back(c, index_of(t, j));
        for (auto& [c, t] : hx.p1[j]) out.emplace_back(c, index_of(i, t));
        return out;
    };

    SmashSplit split;
    for (int sign = +1; sign >= -1; sign -= 2) {
        GradedModP& part = sign > 0 ? split.plus : split.minus;
        part.prime = p;
        // e(sigma(ab)) = 1/2 (sigma(ab) + sign (-1)^{|a||b|} sigma(ba)).
        // A basis of the image: for i < j one combination, for i == j the
        // element survives iff the Koszul sign matches.
        std::vector<std::vector<Int>> vectors;  // coordinates over tens
        std::vector<std::string> names;
        std::vector<int> degs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                // sign of (12)_* on s(a(x)b) -> s(b(x)a): the suspension
                // coordinate contributes a minus sign when the degrees have
                // equal parity, matching the suspended-smash splitting convention (even
                // generators pair symmetrically into the minus part, and a
                // single odd generator has (12)s(uu) = -s(uu))
                int da = hx.basis[i].second, db = hx.basis[j].second;
                int koszul = (da % 2 == db % 2) ? -1 : ((da * db) % 2 == 0 ? 1 : -1);
                std::vector<Int> v(tens.size(), 0);
                if (i == j) {
                    if (sign * koszul != 1) continue;
                    v[index_of(i, i)] = 1;
                    names.push_back("s(" + hx.basis[i].first + hx.basis[i].first + ")");
                } else {
                    v[index_of(i, j)] = 1;
                    v[index_of(j, i)] = mod_p(Int(sign * koszul), p);
                    std::string mid = sign * koszul == 1 ? "+" : "-";
                    names.push_back("s(" + hx.basis[i].first + hx.basis[j].first + mid +
                                    hx.basis[j].first + hx.basis[i].first + ")");
                }
                vectors.push_back(std::move(v));
                degs.push_back(hx.basis[i].second + hx.basis[j].second + 1);
            }
        for (std::size_t b = 0; b < names.size(); ++b) part.basis.emplace_back(names[b], degs[b]);
        // P^1 restricted to the summand: compute on the representative and
        // express in the summand basis.
        part.p1.assign(part.basis.size(), {});
        for (std::size_t b = 0; b < vectors.size(); ++b) {
            std::map<std::size_t, Int> img;
            for (std::size_t t = 0; t < tens.size(); ++t) {
                if (vectors[b][t] == 0) continue;
                for (auto& [c, tgt] : p1_of_tensor(tens[t].i, tens[t].j))
                    img[tgt] = mod_p(img[tgt] + vectors[b][t] * c, p);
            }
            // project: e(img) = img (P^1 commutes with the idempotent), then
            // solve against the summand basis greedily
            for (std::size_t b2 = 0; b2 < vectors.size(); ++b2) {
                // find the leading tensor index of vectors[b2]
                std::size_t lead = tens.size();
                for (std::size_t t = 0; t < tens.size(); ++t)
                    if (vectors[b2][t] != 0) {
                        lead = t;
                        break;
                    }
                if (lead == tens.size()) continue;
                auto it = img.find(lead);
                if (it == img.end() || it->second == 0) continue;
                Int coeff = mod_p(it->second, p);  // leading coefficient of basis vector is 1
                if (coeff == 0) continue;
                for (std::size_t t = 0; t < tens.size(); ++t)
                    if (vectors[b2][t] != 0) img[t] = mod_p(img[t] - coeff * vectors[b2][t], p);
                // balanced representative for display
                Int c = coeff;
                if (c == p - 1) c = -1;
                part.p1[b].emplace_back(c, b2);
            }
        }
    }
    return split;
}

std::string identify_summand(const GradedModP& part) {
    std::vector<int> degs = part.degrees();
    if (degs.empty()) return "*";
    if (degs.size() == 1) return "S^" + std::to_string(degs[0]);
    // count nontrivial P^1 hits
    std::set<int> p1_sources;
    for (std::size_t i = 0; i < part.p1.size(); ++i)
        if (!part.p1[i].empty()) p1_sources.insert(part.basis[i].second);
    if (degs.size() == 3 && degs[1] == degs[0] + 4 && degs[2] == degs[0] + 8 &&
        p1_sources.count(degs[1]) && p1_sources.count(degs[2]))
        return "Sigma^" + std::to_string(degs[0] - 4) + " HP^3";
    if (degs.size() == 2 && degs[1] == degs[0] + 4 && p1_sources.count(degs[1]))
        return "Sigma^" + std::to_string(degs[0] - 4) + " HP^2";
    // wedge of recognizable pieces is not attempted; report the cell data
    std::ostringstream os;
    os << degs.size() << "-cell complex, degrees";
    for (int d : degs) os << " " << d;
    return os.str();
}

namespace {

struct WhParse {
    int m = 0;
    std::string second;          // "" when [i,i]
    std::string post;            // trailing "o <name>" composite
};

WhParse parse_wh(const std::string& expr) {
    // forms: "[i6,nu6]", "[i8,i8]", "[i7,i7]onu13"
    WhParse out;
    if (expr.empty() || expr[0] != '[') throw CwError("bad whitehead expression: " + expr);
    std::size_t close = expr.find(']');
    if (close == std::string::npos) throw CwError("bad whitehead expression: " + expr);
    std::string inner = expr.substr(1, close - 1);
    std::size_t comma = inner.find(',');
    if (comma == std::string::npos) throw CwError("bad whitehead expression: " + expr);
    std::string a = inner.substr(0, comma), b = inner.substr(comma + 1);
    if (a.empty() || a[0] != 'i') throw CwError("whitehead reduction expects [i_m, -]: " + expr);
    out.m = std::stoi(a.substr(1));
    out.second = b;
    if (close + 1 < expr.size()) {
        std::string rest = expr.substr(close + 1);
        if (rest.size() < 2 || rest[0] != 'o') throw CwError("bad whitehead expression tail: " + expr);
        out.post = rest.substr(1);
    }
    return out;
}

}  // namespace

WhiteheadReduction whitehead_reduce(const FactDb& db, const Int& p, const std::string& expr_text) {
    WhiteheadReduction out;
    out.rewritten = expr_text;
    WhParse wh = parse_wh(expr_text);
    std::string iota = "i" + std::to_string(wh.m);

    // direct fact for the whole product
    auto try_direct = [&](const std::string& key) -> bool {
        auto f = db.whitehead(p, key);
        if (!f) return false;
        if (f->symbolic_nonzero) {
            out.symbolic = true;
            out.value = f->value;
            return true;
        }
        if (f->value == "0") {
            out.resolved = true;
            out.zero = true;
            out.value = "0";
            return true;
        }
        GroupEntry e = db.lookup_group(p, f->sphere, f->degree);
        out.expr = db.parse_expr(e, f->value);
        out.resolved = true;
        out.zero = out.expr.is_zero();
        out.value = out.expr.str();
        return true;
    };
    if (try_direct(expr_text)) return out;

    // [i_m, g o Sigma-] = [i_m, i_m] o Sigma(i ^ g): rewrite to the square
    std::string post = wh.post;
    if (wh.second != iota) {
        // locate g in pi_d(S^m) by name to learn its degree
        GroupEntry host;
        bool found = false;
        for (int d = wh.m + 1; d <= wh.m + 16 && !found; ++d) {
            if (!db.has_group(p, wh.m, d)) continue;
            GroupEntry e = db.lookup_group(p, wh.m, d);
            if (e.find(wh.second)) {
                host = e;
                found = true;
            }
        }
        if (!found) throw CwError("whitehead reduction: unknown class " + wh.second);
        int stem = host.degree - wh.m;
        int target_deg = 2 * wh.m - 1 + stem;
        // the smashed class lives on S^{2m-1} in the same family
        GroupEntry tgt = db.lookup_group(p, 2 * wh.m - 1, target_deg);
        std::string smashed;
        auto src_idx = host.find(wh.second);
        for (const auto& g : tgt.gens)
            if (g.family == host.gens[*src_idx].family) smashed = g.name;
        if (smashed.empty() && !tgt.is_zero())
            throw CwError("whitehead reduction: no suspended representative of " + wh.second + " on S^" +
                          std::to_string(2 * wh.m - 1));
        post = smashed;
        out.rewritten = "[" + iota + "," + iota + "]" + (post.empty() ? "" : "o" + post);
        if (tgt.is_zero()) {
            out.resolved = true;
            out.zero = true;
            out.value = "0";
            return out;
        }
        if (try_direct(out.rewritten)) return out;
    }

    // resolve [i_m, i_m], then compose
    ClassExpr square;
    bool square_symbolic = false;
    std::string square_name;
    if (auto f = db.whitehead(p, "[" + iota + "," + iota + "]")) {
        if (f->symbolic_nonzero) {
            square_symbolic = true;
            square_name = f->value;
        } else {
            GroupEntry e = db.lookup_group(p, f->sphere, f->degree);
            square = db.parse_expr(e, f->value);
        }
    } else if (p != 2 && wh.m % 2 == 1) {
        // odd sphere: the Whitehead square is 2-torsion, hence 0 at odd primes
        out.resolved = true;
        out.zero = true;
        out.value = "0";
        out.rewritten = "[" + iota + "," + iota + "]" + (post.empty() ? "" : "o" + post);
        return out;
    } else {
        out.symbolic = true;
        out.value = "[" + iota + "," + iota + "]" + (post.empty() ? "" : "o" + post);
        return out;
    }

    if (post.empty()) {
        if (square_symbolic) {
            out.symbolic = true;
            out.value = square_name;
        } else {
            out.resolved = true;
            out.expr = square;
            out.zero = square.is_zero();
            out.value = square.str();
        }
        return out;
    }

    // find the post class on S^{2m-1}
    GroupEntry host;
    bool found = false;
    for (int d = 2 * wh.m; d <= 2 * wh.m + 18 && !found; ++d) {
        if (!db.has_group(p, 2 * wh.m - 1, d)) continue;
        GroupEntry e = db.lookup_group(p, 2 * wh.m - 1, d);
        if (e.find(post)) {
            host = e;
            found = true;
        }
    }
    if (!found) throw CwError("whitehead reduction: unknown composite class " + post);
    ClassExpr arg{host, std::vector<Int>(host.gens.size(), 0)};
    arg.coeffs[*host.find(post)] = 1;

    if (square_symbolic) {
        // symbolic square composed with a named class: try a composition fact
        // with the symbolic name, otherwise keep the product symbolic
        try {
            ClassExpr val = db.compose(p, wh.m, 2 * wh.m - 1, square_name, arg);
            out.resolved = true;
            out.expr = val;
            out.zero = val.is_zero();
            out.value = val.str();
        } catch (const factdb::MissingFact&) {
            out.symbolic = true;
            out.value = square_name + "o" + post;
        }
        return out;
    }
    if (square.is_zero()) {
        out.resolved = true;
        out.zero = true;
        out.value = "0";
        return out;
    }
    try {
        ClassExpr val = db.compose_expr(square, arg);
        out.resolved = true;
        out.expr = val;
        out.zero = val.is_zero();
        out.value = val.str();
    } catch (const factdb::MissingFact& e) {
        // conservative: unknown, possibly nonzero
        out.symbolic = true;
        out.value = square.str() + " o " + post;
    }
    return out;
}

CellComplex TwoCellModel::complex() const {
    CellComplex c;
    c.cells.push_back({bottom, ""});
    c.cells.push_back({top_cell, wedge ? "" : attach_name});
    return c;
}

TwoCellModel skeleton_of_pinch_fibre(const FactDb& db, int k, const Int& p) {
    if (k < 1) throw CwError("skeleton_of_pinch_fibre requires k >= 1");
    TwoCellModel out;
    out.k = k;
    out.bottom = 4 + k;
    out.attach_from = 10 + 2 * k;
    out.top_cell = 11 + 2 * k;
    std::string y = p == 2 ? "nu" + std::to_string(4 + k) : "alpha1(" + std::to_string(4 + k) + ")";
    std::string expr = "[i" + std::to_string(4 + k) + "," + y + "]";
    WhiteheadReduction red = whitehead_reduce(db, p, expr);
    if (red.symbolic) {
        out.symbolic = true;
        out.attach_name = red.value;
        return out;
    }
    if (!red.resolved) throw CwError("unresolved attaching class for F_" + std::to_string(k));
    if (red.zero) {
        out.wedge = true;
        out.attach_name = "0";
        return out;
    }
    // normalize to the unit-orbit representative (cofibres of unit multiples
    // agree, and the printed tables use the normalized class)
    FgModule amb = red.expr.entry.module();
    std::vector<LocalScalar> coords;
    for (const auto& c : red.expr.coeffs) coords.push_back(LocalScalar(c));
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < coords.size(); ++i) all.push_back(i);
    auto norm = normalize_attaching(amb, coords, {all});
    ClassExpr normalized{red.expr.entry, std::vector<Int>(red.expr.coeffs.size(), 0)};
    for (std::size_t i = 0; i < norm.size(); ++i) {
        if (norm[i].den != 1) throw CwError("non-integral normalized attaching class");
        normalized.coeffs[i] = norm[i].num;
        // balanced residue for display (6 mod 8 prints as -2)
        auto oe = red.expr.entry.gens[i].order_exp;
        if (oe) {
            Int full = int_pow(p, *oe);
            if (normalized.coeffs[i] * 2 > full) normalized.coeffs[i] -= full;
        }
    }
    out.attach = normalized;
    out.attach_name = normalized.str();
    return out;
}

std::vector<LocalScalar> normalize_attaching(const FgModule& ambient,
                                             const std::vector<LocalScalar>& coords,
                                             const std::vector<std::vector<std::size_t>>& components) {
    if (coords.size() != ambient.gen_count()) throw CwError("normalize_attaching: coordinate mismatch");
    const Int& p = ambient.prime;
    unsigned emax = ambient.torsion.empty() ? 1 : ambient.torsion.front();
    Int pe = int_pow(p, emax);

    std::vector<LocalScalar> out = coords;
    auto apply = [&](const std::vector<std::size_t>& comp, const LocalScalar& u) {
        for (std::size_t i : comp) out[i] = out[i] * u;
    };
    for (const auto& comp : components) {
        // a free coordinate fixes the unit exactly: scale it to p^valuation
        std::size_t free_idx = comp.size();
        for (std::size_t i : comp)
            if (static_cast<int>(i) < ambient.free_rank && !out[i].is_zero()) {
                free_idx = i;
                break;
            }
        if (free_idx != comp.size()) {
            int v = out[free_idx].val(p);
            LocalScalar target(int_pow(p, static_cast<unsigned>(v)));
            LocalScalar u = target / out[free_idx];
            apply(comp, u);
            continue;
        }
        // torsion only: minimize the reduced coordinate tuple over units mod p^emax
        std::vector<Int> best;
        LocalScalar best_u(1);
        for (Int u = 1; u < pe; ++u) {
            if (u % p == 0) continue;
            std::vector<Int> tup;
            for (std::size_t i : comp) {
                std::size_t t = i - ambient.free_rank;
                LocalScalar scaled = out[i] * LocalScalar(u);
                tup.push_back(scaled.is_zero() ? Int(0) : scaled.mod_power(p, ambient.torsion[t]));
            }
            if (best.empty() || tup < best) {
                best = tup;
                best_u = LocalScalar(u);
            }
        }
        if (!best.empty()) apply(comp, best_u);
    }
    // reduce torsion coordinates
    alg::Element e(ambient, out);
    return e.coords;
}

}  // namespace hpstems::cw
