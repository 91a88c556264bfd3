#include "hpstems/local_algebra.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

namespace hpstems::alg {

Int int_gcd(Int a, Int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        Int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Int int_pow(const Int& base, unsigned exp) {
    Int r = 1;
    for (unsigned i = 0; i < exp; ++i) r *= base;
    return r;
}

int valuation(const Int& x, const Int& p) {
    if (x == 0) throw AlgError("valuation of zero");
    Int y = x < 0 ? Int(-x) : x;
    int v = 0;
    while (y % p == 0) {
        y /= p;
        ++v;
    }
    return v;
}

LocalScalar::LocalScalar(Int n, Int d) : num(std::move(n)), den(std::move(d)) {
    if (den == 0) throw AlgError("zero denominator");
    reduce();
}

LocalScalar LocalScalar::in_ring(const Int& p, Int n, Int d) {
    LocalScalar s(std::move(n), std::move(d));
    if (s.den % p == 0) throw AlgError("denominator not coprime to p: " + s.str());
    return s;
}

void LocalScalar::reduce() {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (num == 0) {
        den = 1;
        return;
    }
    Int g = int_gcd(num, den);
    num /= g;
    den /= g;
}

int LocalScalar::val(const Int& p) const {
    if (is_zero()) return INT_MAX;
    return valuation(num, p) - valuation(den, p);
}

LocalScalar LocalScalar::operator+(const LocalScalar& o) const {
    return LocalScalar(num * o.den + o.num * den, den * o.den);
}
LocalScalar LocalScalar::operator-(const LocalScalar& o) const {
    return LocalScalar(num * o.den - o.num * den, den * o.den);
}
LocalScalar LocalScalar::operator*(const LocalScalar& o) const {
    return LocalScalar(num * o.num, den * o.den);
}
LocalScalar LocalScalar::operator/(const LocalScalar& o) const {
    if (o.is_zero()) throw AlgError("division by zero");
    return LocalScalar(num * o.den, den * o.num);
}

Int LocalScalar::mod_power(const Int& p, unsigned e) const {
    Int m = int_pow(p, e);
    if (m == 1) return 0;
    Int d = den % m;
    if (d < 0) d += m;
    // invert d mod m (d coprime to p, hence to m) by extended Euclid
    Int t = 0, newt = 1, r = m, newr = d;
    while (newr != 0) {
        Int q = r / newr;
        Int tmp = t - q * newt;
        t = newt;
        newt = tmp;
        tmp = r - q * newr;
        r = newr;
        newr = tmp;
    }
    if (r != 1) throw AlgError("denominator not invertible mod p^e");
    Int inv = t % m;
    Int out = (num % m) * inv % m;
    if (out < 0) out += m;
    return out;
}

std::string LocalScalar::str() const {
    std::ostringstream os;
    os << num;
    if (den != 1) os << "/" << den;
    return os.str();
}

LocalMatrix LocalMatrix::identity(std::size_t n) {
    LocalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = LocalScalar(1);
    return m;
}

LocalMatrix LocalMatrix::mul(const LocalMatrix& o) const {
    if (cols != o.rows) throw AlgError("matrix shape mismatch");
    LocalMatrix r(rows, o.cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < cols; ++k) {
            if (at(i, k).is_zero()) continue;
            for (std::size_t j = 0; j < o.cols; ++j)
                r.at(i, j) = r.at(i, j) + at(i, k) * o.at(k, j);
        }
    return r;
}

LocalMatrix LocalMatrix::transpose() const {
    LocalMatrix r(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
}

LocalScalar LocalMatrix::det() const {
    if (rows != cols) throw AlgError("det of non-square matrix");
    LocalMatrix a = *this;
    LocalScalar d(1);
    for (std::size_t k = 0; k < rows; ++k) {
        std::size_t piv = k;
        while (piv < rows && a.at(piv, k).is_zero()) ++piv;
        if (piv == rows) return LocalScalar(0);
        if (piv != k) {
            for (std::size_t j = 0; j < cols; ++j) std::swap(a.at(piv, j), a.at(k, j));
            d = -d;
        }
        d = d * a.at(k, k);
        for (std::size_t i = k + 1; i < rows; ++i) {
            if (a.at(i, k).is_zero()) continue;
            LocalScalar f = a.at(i, k) / a.at(k, k);
            for (std::size_t j = k; j < cols; ++j) a.at(i, j) = a.at(i, j) - f * a.at(k, j);
        }
    }
    return d;
}

bool LocalMatrix::operator==(const LocalMatrix& o) const {
    return rows == o.rows && cols == o.cols && entries == o.entries;
}

// Smith normal form over Z_(p).  Pivot selection: entry of minimal
// p-valuation among the remaining block, ties broken row-major, which makes
// the diagonal automatically satisfy the divisibility chain and keeps
// derivation traces deterministic.
SnfResult snf(const Int& p, const LocalMatrix& m) {
    SnfResult res;
    res.d = m;
    res.u = LocalMatrix::identity(m.rows);
    res.v = LocalMatrix::identity(m.cols);
    LocalMatrix& d = res.d;
    LocalMatrix& u = res.u;
    LocalMatrix& v = res.v;

    std::size_t n = std::min(m.rows, m.cols);
    for (std::size_t k = 0; k < n; ++k) {
        // locate pivot
        int best = INT_MAX;
        std::size_t bi = k, bj = k;
        for (std::size_t i = k; i < d.rows; ++i)
            for (std::size_t j = k; j < d.cols; ++j) {
                int val = d.at(i, j).val(p);
                if (val < best) {
                    best = val;
                    bi = i;
                    bj = j;
                }
            }
        if (best == INT_MAX) break;  // remaining block is zero
        if (bi != k)
            for (std::size_t j = 0; j < d.cols; ++j) std::swap(d.at(bi, j), d.at(k, j));
        if (bi != k)
            for (std::size_t j = 0; j < u.cols; ++j) std::swap(u.at(bi, j), u.at(k, j));
        if (bj != k)
            for (std::size_t i = 0; i < d.rows; ++i) std::swap(d.at(i, bj), d.at(i, k));
        if (bj != k)
            for (std::size_t i = 0; i < v.rows; ++i) std::swap(v.at(i, bj), v.at(i, k));

        // normalize the pivot to exactly p^best (scale the row by a unit)
        LocalScalar target(int_pow(p, static_cast<unsigned>(best)));
        LocalScalar unit = d.at(k, k) / target;
        for (std::size_t j = 0; j < d.cols; ++j) d.at(k, j) = d.at(k, j) / unit;
        for (std::size_t j = 0; j < u.cols; ++j) u.at(k, j) = u.at(k, j) / unit;

        // clear the rest of column and row; quotients lie in Z_(p) because the
        // pivot has minimal valuation
        for (std::size_t i = k + 1; i < d.rows; ++i) {
            if (d.at(i, k).is_zero()) continue;
            LocalScalar f = d.at(i, k) / d.at(k, k);
            for (std::size_t j = 0; j < d.cols; ++j) d.at(i, j) = d.at(i, j) - f * d.at(k, j);
            for (std::size_t j = 0; j < u.cols; ++j) u.at(i, j) = u.at(i, j) - f * u.at(k, j);
        }
        for (std::size_t j = k + 1; j < d.cols; ++j) {
            if (d.at(k, j).is_zero()) continue;
            LocalScalar f = d.at(k, j) / d.at(k, k);
            for (std::size_t i = 0; i < d.rows; ++i) d.at(i, j) = d.at(i, j) - f * d.at(i, k);
            for (std::size_t i = 0; i < v.rows; ++i) v.at(i, j) = v.at(i, j) - f * v.at(i, k);
        }
    }
    return res;
}

FgModule::FgModule(Int p, int rank, std::vector<unsigned> exps)
    : prime(std::move(p)), free_rank(rank), torsion(std::move(exps)) {
    if (free_rank < 0) throw AlgError("negative free rank");
    for (unsigned e : torsion)
        if (e == 0) throw AlgError("torsion exponent must be >= 1");
    std::sort(torsion.begin(), torsion.end(), std::greater<unsigned>());
}

Int FgModule::torsion_order() const {
    Int o = 1;
    for (unsigned e : torsion) o *= int_pow(prime, e);
    return o;
}

FgModule FgModule::direct_sum(const FgModule& o) const {
    if (prime != o.prime) throw AlgError("direct sum across primes");
    std::vector<unsigned> exps = torsion;
    exps.insert(exps.end(), o.torsion.begin(), o.torsion.end());
    return FgModule(prime, free_rank + o.free_rank, std::move(exps));
}

bool FgModule::contains_subgroup(const FgModule& sub) const {
    if (sub.prime != prime) return false;
    if (sub.free_rank > free_rank) return false;
    if (sub.torsion.size() > torsion.size()) return false;
    for (std::size_t i = 0; i < sub.torsion.size(); ++i)
        if (sub.torsion[i] > torsion[i]) return false;
    return true;
}

bool FgModule::operator<(const FgModule& o) const {
    if (prime != o.prime) return prime < o.prime;
    if (free_rank != o.free_rank) return free_rank < o.free_rank;
    return torsion < o.torsion;
}

std::string FgModule::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    if (free_rank > 0) {
        os << "Z(" << prime << ")";
        if (free_rank > 1) os << "^" << free_rank;
        first = false;
    }
    for (unsigned e : torsion) {
        if (!first) os << " + ";
        os << "Z/" << int_pow(prime, e);
        first = false;
    }
    return os.str();
}

FgModule FgModule::parse(const Int& p, const std::string& text) {
    std::string compact;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) compact.push_back(c);
    if (compact.empty()) throw AlgError("empty module expression");
    if (compact == "0") return FgModule::zero(p);
    int rank = 0;
    std::vector<unsigned> exps;
    std::size_t pos = 0;
    while (pos < compact.size()) {
        std::size_t next = compact.find('+', pos);
        std::string tok = compact.substr(pos, next == std::string::npos ? next : next - pos);
        pos = next == std::string::npos ? compact.size() : next + 1;
        if (tok.empty()) throw AlgError("bad module expression: " + text);
        if (tok.rfind("Z(", 0) == 0) {
            std::size_t close = tok.find(')');
            if (close == std::string::npos) throw AlgError("bad free-part token: " + tok);
            Int q(tok.substr(2, close - 2));
            if (q != p) throw AlgError("free part at wrong prime in: " + text);
            int r = 1;
            if (close + 1 < tok.size()) {
                if (tok[close + 1] != '^') throw AlgError("bad free-part token: " + tok);
                r = std::stoi(tok.substr(close + 2));
            }
            rank += r;
        } else if (tok.rfind("Z/", 0) == 0) {
            Int q(tok.substr(2));
            if (q <= 1) throw AlgError("bad cyclic order: " + tok);
            int e = 0;
            while (q % p == 0) {
                q /= p;
                ++e;
            }
            if (q != 1 || e == 0) throw AlgError("cyclic order not a power of p: " + tok);
            exps.push_back(static_cast<unsigned>(e));
        } else if (tok == "inf") {
            rank += 1;
        } else {
            throw AlgError("bad module token: " + tok);
        }
    }
    return FgModule(p, rank, std::move(exps));
}

Element::Element(FgModule m, std::vector<LocalScalar> c) : ambient(std::move(m)), coords(std::move(c)) {
    if (coords.size() != ambient.gen_count()) throw AlgError("element coordinate count mismatch");
    reduce();
}

void Element::reduce() {
    for (std::size_t i = 0; i < ambient.torsion.size(); ++i) {
        auto& c = coords[ambient.free_rank + i];
        if (!c.is_zero()) c = LocalScalar(c.mod_power(ambient.prime, ambient.torsion[i]));
    }
}

bool Element::is_zero() const {
    for (const auto& c : coords)
        if (!c.is_zero()) return false;
    return true;
}

std::optional<Int> Element::order() const {
    for (int i = 0; i < ambient.free_rank; ++i)
        if (!coords[i].is_zero()) return std::nullopt;
    Int n = 1;
    for (std::size_t i = 0; i < ambient.torsion.size(); ++i) {
        const auto& c = coords[ambient.free_rank + i];
        if (c.is_zero()) continue;
        int v = c.val(ambient.prime);
        int e = static_cast<int>(ambient.torsion[i]);
        if (v < e) {
            Int o = int_pow(ambient.prime, static_cast<unsigned>(e - v));
            if (o > n) n = o;
        }
    }
    return n;
}

std::vector<LocalScalar> QuotientPresentation::map(const std::vector<LocalScalar>& ambient_coords) const {
    if (ambient_coords.size() != to_canonical.cols) throw AlgError("map coordinate mismatch");
    std::vector<LocalScalar> out(module.gen_count());
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < to_canonical.cols; ++j)
            if (!to_canonical.at(i, j).is_zero())
                out[i] = out[i] + to_canonical.at(i, j) * ambient_coords[j];
    return out;
}

Element QuotientPresentation::map_element(const std::vector<LocalScalar>& ambient_coords) const {
    return Element(module, map(ambient_coords));
}

QuotientPresentation quotient_presentation_full(const Int& p, std::size_t n_generators,
                                                const LocalMatrix& relations) {
    if (relations.rows > 0 && relations.cols != n_generators)
        throw AlgError("relation width disagrees with generator count");
    // Module = coker(R^T : Z^r -> Z^n).  SNF(R^T) = U A V gives coker
    // coordinates y = U x with diagonal relation lattice.
    LocalMatrix a = relations.transpose();
    if (a.rows == 0) a = LocalMatrix(n_generators, 0);
    SnfResult s = snf(p, a);
    std::size_t rank = 0;
    std::vector<unsigned> diag_vals;
    for (std::size_t k = 0; k < std::min(a.rows, a.cols); ++k) {
        if (s.d.at(k, k).is_zero()) break;
        diag_vals.push_back(static_cast<unsigned>(s.d.at(k, k).val(p)));
        ++rank;
    }
    // slot i < rank: Z/p^{diag_vals[i]} (dropped if exponent 0);
    // slots >= rank: free.
    std::vector<unsigned> exps;
    std::vector<std::size_t> torsion_slots;
    for (std::size_t i = 0; i < rank; ++i)
        if (diag_vals[i] > 0) {
            exps.push_back(diag_vals[i]);
            torsion_slots.push_back(i);
        }
    // canonical order: free first, torsion by descending exponent (SNF gives
    // ascending valuations, so reverse)
    std::reverse(exps.begin(), exps.end());
    std::reverse(torsion_slots.begin(), torsion_slots.end());
    int free_rank = static_cast<int>(n_generators - rank);

    QuotientPresentation out;
    out.module = FgModule(p, free_rank, exps);
    out.to_canonical = LocalMatrix(out.module.gen_count(), n_generators);
    std::size_t row = 0;
    for (std::size_t i = rank; i < n_generators; ++i, ++row)
        for (std::size_t j = 0; j < n_generators; ++j) out.to_canonical.at(row, j) = s.u.at(i, j);
    for (std::size_t slot : torsion_slots) {
        for (std::size_t j = 0; j < n_generators; ++j) out.to_canonical.at(row, j) = s.u.at(slot, j);
        ++row;
    }
    return out;
}

FgModule quotient_presentation(const Int& p, std::size_t n_generators, const LocalMatrix& relations) {
    return quotient_presentation_full(p, n_generators, relations).module;
}

FgModule p_component(int free_rank, const std::vector<Int>& torsion_orders, const Int& p) {
    std::vector<unsigned> exps;
    for (const Int& n : torsion_orders) {
        if (n <= 0) throw AlgError("torsion order must be positive");
        Int q = n;
        unsigned e = 0;
        while (q % p == 0) {
            q /= p;
            ++e;
        }
        if (e > 0) exps.push_back(e);
    }
    return FgModule(p, free_rank, std::move(exps));
}

int stable_range_bound(int d, const SpaceSpec& space) {
    if (d < 0) throw AlgError("negative stem");
    int bound = space.is_sphere ? d + 2 - 2 * space.sphere_dim : d - 6;
    return std::max(bound, 0);
}

LocalMatrix kernel_basis(const Int& p, const LocalMatrix& a) {
    if (a.cols == 0) return LocalMatrix(0, 0);
    SnfResult s = snf(p, a);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < std::min(a.rows, a.cols); ++k) {
        if (s.d.at(k, k).is_zero()) break;
        ++rank;
    }
    LocalMatrix out(a.cols, a.cols - rank);
    for (std::size_t j = rank; j < a.cols; ++j)
        for (std::size_t i = 0; i < a.cols; ++i) out.at(i, j - rank) = s.v.at(i, j);
    return out;
}

std::optional<std::vector<LocalScalar>> solve(const Int& p, const LocalMatrix& a,
                                              const std::vector<LocalScalar>& b) {
    if (b.size() != a.rows) throw AlgError("solve: rhs size mismatch");
    SnfResult s = snf(p, a);
    std::vector<LocalScalar> c(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.rows; ++j)
            if (!s.u.at(i, j).is_zero()) c[i] = c[i] + s.u.at(i, j) * b[j];
    std::size_t n = std::min(a.rows, a.cols);
    std::vector<LocalScalar> y(a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        if (i < n && !s.d.at(i, i).is_zero()) {
            LocalScalar q = c[i] / s.d.at(i, i);
            if (!q.is_zero() && q.val(p) < 0) return std::nullopt;  // not divisible in Z_(p)
            y[i] = q;
        } else if (!c[i].is_zero()) {
            return std::nullopt;
        }
    }
    std::vector<LocalScalar> x(a.cols);
    for (std::size_t i = 0; i < a.cols; ++i)
        for (std::size_t j = 0; j < a.cols; ++j)
            if (!s.v.at(i, j).is_zero()) x[i] = x[i] + s.v.at(i, j) * y[j];
    return x;
}

}  // namespace hpstems::alg
