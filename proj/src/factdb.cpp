#include "hpstems/factdb.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hpstems::factdb {

using alg::int_pow;
using alg::LocalMatrix;
using alg::LocalScalar;
using json = nlohmann::ordered_json;

namespace {

std::string substitute_sphere(const std::string& tmpl, int n) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == 'n') {
            std::size_t close = tmpl.find('}', i);
            if (close == std::string::npos) throw DbError("bad name template: " + tmpl);
            std::string inner = tmpl.substr(i + 1, close - i - 1);  // "n" or "n+3"
            int shift = 0;
            if (inner.size() > 1) {
                if (inner[1] != '+') throw DbError("bad name template: " + tmpl);
                shift = std::stoi(inner.substr(2));
            }
            out += std::to_string(n + shift);
            i = close + 1;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

Generator parse_generator(const json& j) {
    Generator g;
    g.name = j.at("name").get<std::string>();
    if (j.contains("order")) {
        auto& o = j.at("order");
        if (o.is_string() && o.get<std::string>() == "inf")
            g.order_exp = std::nullopt;
        else
            g.order_exp = o.get<unsigned>();
    } else {
        throw DbError("generator without order: " + g.name);
    }
    g.family = j.value("family", g.name);
    g.suspension = j.value("suspension", true);
    return g;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

FgModule GroupEntry::module() const {
    int free_rank = 0;
    std::vector<unsigned> exps;
    for (const auto& g : gens) {
        if (!g.order_exp)
            ++free_rank;
        else
            exps.push_back(*g.order_exp);
    }
    return FgModule(prime, free_rank, std::move(exps));
}

std::optional<std::size_t> GroupEntry::find(const std::string& name) const {
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (gens[i].name == name) return i;
    return std::nullopt;
}

bool ClassExpr::is_zero() const {
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        const auto& g = entry.gens[i];
        if (!g.order_exp) return false;
        if (coeffs[i] % int_pow(entry.prime, *g.order_exp) != 0) return false;
    }
    return true;
}

std::optional<Int> ClassExpr::order() const {
    Int n = 1;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        const auto& g = entry.gens[i];
        if (!g.order_exp) return std::nullopt;
        Int full = int_pow(entry.prime, *g.order_exp);
        Int c = coeffs[i] % full;
        if (c < 0) c += full;
        if (c == 0) continue;
        Int o = full / alg::int_gcd(c, full);
        if (o > n) n = o;
    }
    return n;
}

std::string ClassExpr::str() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        Int c = coeffs[i];
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0)
            os << "-";
        Int a = c < 0 ? Int(-c) : c;
        if (a != 1) os << a << " ";
        os << entry.gens[i].name;
        first = false;
    }
    if (first) return "0";
    return os.str();
}

class DbBuilder {
  public:
    FactDb db;

    void add_doc(const json& j) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "meta") {
            db.version_ = j.value("version", "0");
        } else if (kind == "group") {
            GroupEntry e;
            e.prime = Int(j.at("prime").get<int>());
            e.sphere = j.at("sphere").get<int>();
            e.degree = j.at("degree").get<int>();
            for (auto& g : j.value("generators", json::array())) e.gens.push_back(parse_generator(g));
            e.note = j.value("note", "");
            db.groups_.push_back(std::move(e));
        } else if (kind == "stable") {
            FactDb::StableStem s;
            s.prime = Int(j.at("prime").get<int>());
            s.stem = j.at("stem").get<int>();
            for (auto& g : j.value("generators", json::array())) s.gens.push_back(parse_generator(g));
            db.stable_.push_back(std::move(s));
        } else if (kind == "composition") {
            CompositionFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.left_sphere = j.at("sphere").get<int>();
            f.left_degree = j.at("left_degree").get<int>();
            f.left = j.at("left").get<std::string>();
            f.right = j.at("right").get<std::string>();
            f.right_degree = j.at("right_degree").get<int>();
            f.result = j.at("result").get<std::string>();
            f.cite = j.value("cite", "");
            db.compositions_.push_back(std::move(f));
        } else if (kind == "suspension") {
            SuspensionFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.sphere = j.at("sphere").get<int>();
            f.degree = j.at("degree").get<int>();
            for (auto& im : j.value("images", json::array()))
                f.images.emplace_back(im.at(0).get<std::string>(), im.at(1).get<std::string>());
            f.epi = j.value("epi", true);
            f.mono = j.value("mono", false);
            f.iso = j.value("iso", false);
            f.cite = j.value("cite", "");
            db.suspensions_.push_back(std::move(f));
        } else if (kind == "whitehead") {
            WhiteheadFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.expr = j.at("expr").get<std::string>();
            f.sphere = j.at("sphere").get<int>();
            f.degree = j.at("degree").get<int>();
            f.value = j.at("value").get<std::string>();
            f.symbolic_nonzero = j.value("symbolic_nonzero", false);
            f.cite = j.value("cite", "");
            db.whitehead_.push_back(std::move(f));
        } else if (kind == "bracket") {
            BracketFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.alpha = j.at("alpha").get<std::string>();
            f.beta = j.at("beta").get<std::string>();
            f.gamma = j.at("gamma").get<std::string>();
            f.contains = j.value("contains", "");
            f.indeterminacy = j.value("indeterminacy", "");
            f.cite = j.value("cite", "");
            db.brackets_.push_back(std::move(f));
        } else if (kind == "goal_fact") {
            GoalFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.r = j.at("r").get<int>();
            f.k_min = j.at("k_min").get<int>();
            f.k_max = j.at("k_max").get<int>();
            f.kind = j.at("fact").get<std::string>();
            if (j.contains("value")) f.value = Int(j.at("value").get<long long>());
            f.element = j.value("element", "");
            f.cite = j.value("cite", "");
            db.goal_facts_.push_back(std::move(f));
        } else if (kind == "split") {
            SplitFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.k = j.at("k").get<int>();
            f.degree = j.at("degree").get<int>();
            f.cite = j.value("cite", "");
            db.splits_.push_back(std::move(f));
        } else if (kind == "stable_hp2") {
            StableHp2 f;
            f.prime = Int(j.at("prime").get<int>());
            f.r = j.at("r").get<int>();
            f.module = j.at("module").get<std::string>();
            for (auto& g : j.value("generators", json::array())) f.gens.push_back(g.get<std::string>());
            f.cite = j.value("cite", "");
            db.stable_hp2_.push_back(std::move(f));
        } else if (kind == "boundary_span") {
            BoundarySpanFact f;
            f.prime = Int(j.at("prime").get<int>());
            f.k = j.at("k").get<int>();
            f.degree = j.at("degree").get<int>();
            f.which = j.at("which").get<std::string>();
            f.branch = j.value("branch", "");
            for (auto& e : j.value("exprs", json::array())) f.exprs.push_back(e.get<std::string>());
            f.cite = j.value("cite", "");
            db.spans_.push_back(std::move(f));
        } else if (kind == "hypothesis") {
            Hypothesis h;
            h.id = j.at("id").get<std::string>();
            for (auto& b : j.at("branches")) h.branches.push_back(b.get<std::string>());
            h.cite = j.value("cite", "");
            db.hypotheses_.push_back(std::move(h));
        } else {
            throw DbError("unknown fact kind: " + kind);
        }
    }
};

FactDb FactDb::load(const std::string& dir, bool extended) {
    DbBuilder b;
    b.db.extended_ = extended;
    std::vector<std::string> files = {
        "meta.jsonl",      "stable_p2.jsonl", "stable_p3.jsonl", "spheres_p2.jsonl",
        "spheres_p3.jsonl", "facts_p2.jsonl",  "facts_p3.jsonl",  "hp2_stable.jsonl",
    };
    if (extended) files.push_back("extended_p2.jsonl");
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& f : files) {
        std::string path = dir + "/factdb/" + f;
        std::ifstream in(path);
        if (!in) throw DbError("cannot open fact file: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const std::exception& e) {
                throw DbError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            h = fnv1a(j.dump(), h);
            b.add_doc(j);
        }
    }
    std::ostringstream hs;
    hs << std::hex << h;
    b.db.hash_ = hs.str();
    b.db.index();
    return b.db;
}

std::string FactDb::normalize_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DbError("cannot open fact file: " + path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        out << json::parse(line).dump() << "\n";
    }
    return out.str();
}

void FactDb::index() {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        auto key = std::make_pair(groups_[i].sphere, groups_[i].degree);
        auto& idx = groups_[i].prime == 2 ? group_idx_p2_ : group_idx_p3_;
        if (idx.count(key))
            throw DbError("duplicate sphere entry (" + std::to_string(groups_[i].sphere) + "," +
                          std::to_string(groups_[i].degree) + ")");
        idx[key] = i;
    }
}

GroupEntry FactDb::materialize_stable(const Int& p, int n, int m) const {
    int stem = m - n;
    for (const auto& s : stable_) {
        if (s.prime != p || s.stem != stem) continue;
        GroupEntry e;
        e.prime = p;
        e.sphere = n;
        e.degree = m;
        e.from_stable = true;
        for (const auto& g : s.gens) {
            Generator out = g;
            out.name = substitute_sphere(g.name, n);
            out.family = g.family;
            e.gens.push_back(std::move(out));
        }
        return e;
    }
    std::ostringstream os;
    os << "missing sphere entry (p=" << p << ", n=" << n << ", m=" << m << "): no stable stem " << stem;
    throw MissingFact(os.str());
}

bool FactDb::has_group(const Int& p, int n, int m) const {
    try {
        lookup_group(p, n, m);
        return true;
    } catch (const MissingFact&) {
        return false;
    }
}

GroupEntry FactDb::lookup_group(const Int& p, int n, int m) const {
    if (n < 2) throw DbError("sphere dimension must be >= 2");
    const auto& idx = p == 2 ? group_idx_p2_ : group_idx_p3_;
    auto it = idx.find({n, m});
    if (it != idx.end()) return groups_[it->second];
    if (m < n) {
        GroupEntry e;
        e.prime = p;
        e.sphere = n;
        e.degree = m;
        return e;  // trivially zero below the bottom cell
    }
    if (m == n) {
        GroupEntry e;
        e.prime = p;
        e.sphere = n;
        e.degree = m;
        Generator g;
        g.name = "i" + std::to_string(n);
        g.order_exp = std::nullopt;
        g.family = "iota";
        g.suspension = n >= 2;
        e.gens.push_back(g);
        return e;
    }
    if (m - n <= n - 2) return materialize_stable(p, n, m);
    std::ostringstream os;
    os << "missing sphere entry (p=" << p << ", n=" << n << ", m=" << m << ")";
    throw MissingFact(os.str());
}

ClassExpr FactDb::parse_expr(const GroupEntry& entry, const std::string& text) const {
    ClassExpr out{entry, std::vector<Int>(entry.gens.size(), 0)};
    std::string compact;
    // tokenize on +/- keeping signs; names contain no '+', '-', or spaces
    std::vector<std::pair<int, std::string>> terms;
    int sign = 1;
    std::string cur;
    auto flush = [&]() {
        std::string tok;
        for (char c : cur)
            if (!isspace(static_cast<unsigned char>(c)) && c != '*') tok.push_back(c);
        if (!tok.empty()) terms.emplace_back(sign, tok);
        cur.clear();
    };
    for (char c : text) {
        if (c == '+') {
            flush();
            sign = 1;
        } else if (c == '-') {
            flush();
            sign = -1;
        } else {
            cur.push_back(c);
        }
    }
    flush();
    for (auto& [sgn, tok] : terms) {
        if (tok == "0") continue;
        std::size_t i = 0;
        std::string digits;
        while (i < tok.size() && isdigit(static_cast<unsigned char>(tok[i]))) digits.push_back(tok[i++]);
        Int coeff = digits.empty() ? Int(1) : Int(digits);
        std::string name = tok.substr(i);
        if (name.empty()) throw DbError("bare coefficient in expression: " + text);
        auto gi = entry.find(name);
        if (!gi)
            throw DbError("expression names unknown generator '" + name + "' of pi_" +
                          std::to_string(entry.degree) + "(S^" + std::to_string(entry.sphere) + "): " + text);
        out.coeffs[*gi] += Int(sgn) * coeff;
    }
    return out;
}

ClassExpr FactDb::compose(const Int& p, int left_sphere, int left_degree, const std::string& left_name,
                          const ClassExpr& arg) const {
    if (arg.entry.sphere != left_degree)
        throw DbError("compose: degree mismatch between " + left_name + " and argument");
    int m = arg.entry.degree;
    GroupEntry target = lookup_group(p, left_sphere, m);
    ClassExpr out{target, std::vector<Int>(target.gens.size(), 0)};
    if (target.is_zero()) return out;
    if (left_sphere == left_degree) {  // iota composed with arg
        for (std::size_t i = 0; i < arg.coeffs.size(); ++i) {
            auto gi = target.find(arg.entry.gens[i].name);
            if (!gi) throw DbError("identity composition cannot transport " + arg.entry.gens[i].name);
            out.coeffs[*gi] += arg.coeffs[i];
        }
        return out;
    }
    FgModule target_mod = target.module();
    for (std::size_t i = 0; i < arg.coeffs.size(); ++i) {
        if (arg.coeffs[i] == 0) continue;
        const Generator& g = arg.entry.gens[i];
        // identity argument: left itself viewed in the target entry
        if (g.family == "iota") {
            auto gi = target.find(left_name);
            if (!gi) throw MissingFact("composition " + left_name + " o " + g.name +
                                       ": left class not a listed generator of the target entry");
            out.coeffs[*gi] += arg.coeffs[i];
            continue;
        }
        const CompositionFact* fact = nullptr;
        for (const auto& f : compositions_)
            if (f.prime == p && f.left_sphere == left_sphere && f.left_degree == left_degree &&
                f.left == left_name && f.right == g.name && f.right_degree == m) {
                fact = &f;
                break;
            }
        if (fact) {
            ClassExpr val = parse_expr(target, fact->result);
            for (std::size_t jj = 0; jj < out.coeffs.size(); ++jj)
                out.coeffs[jj] += arg.coeffs[i] * val.coeffs[jj];
            continue;
        }
        // finite-order argument into a torsion-free target composes to zero
        if (g.order_exp && target_mod.torsion.empty()) continue;
        std::ostringstream os;
        os << "missing composition fact (p=" << p << "): " << left_name << " in pi_" << left_degree
           << "(S^" << left_sphere << ") o " << g.name << " in pi_" << m << "(S^" << left_degree << ")";
        throw MissingFact(os.str());
    }
    return out;
}

FactDb::Composed FactDb::compose_or_symbolic(const Int& p, int left_sphere, int left_degree,
                                             const std::string& left_name,
                                             const ClassExpr& arg) const {
    Composed out;
    try {
        out.value = compose(p, left_sphere, left_degree, left_name, arg);
    } catch (const MissingFact&) {
        out.symbolic = true;
        out.symbol = left_name + " o (" + arg.str() + ")";
    }
    return out;
}

ClassExpr FactDb::compose_expr(const ClassExpr& left, const ClassExpr& arg) const {
    const Int& p = left.entry.prime;
    int m = arg.entry.degree;
    GroupEntry target = lookup_group(p, left.entry.sphere, m);
    ClassExpr out{target, std::vector<Int>(target.gens.size(), 0)};
    if (target.is_zero()) return out;
    // (sum c_j l_j) o x = sum c_j (l_j o x) requires x to be a suspension when
    // any c_j != +-1 or the sum has several terms
    int nonzero = 0;
    bool needs_susp = false;
    for (std::size_t j = 0; j < left.coeffs.size(); ++j) {
        if (left.coeffs[j] == 0) continue;
        ++nonzero;
        if (left.coeffs[j] != 1 && left.coeffs[j] != -1) needs_susp = true;
    }
    if (nonzero > 1) needs_susp = true;
    if (needs_susp)
        for (std::size_t i = 0; i < arg.coeffs.size(); ++i)
            if (arg.coeffs[i] != 0 && !arg.entry.gens[i].suspension)
                throw DbError("left distribution over non-suspension argument " + arg.entry.gens[i].name);
    for (std::size_t j = 0; j < left.coeffs.size(); ++j) {
        if (left.coeffs[j] == 0) continue;
        // (c l) o g has order dividing ord(g); drop terms killed by the coefficient
        ClassExpr reduced_arg = arg;
        bool all_zero = true;
        for (std::size_t i = 0; i < reduced_arg.coeffs.size(); ++i) {
            if (reduced_arg.coeffs[i] == 0) continue;
            const auto& g = reduced_arg.entry.gens[i];
            if (g.order_exp &&
                (left.coeffs[j] * reduced_arg.coeffs[i]) % int_pow(p, *g.order_exp) == 0) {
                reduced_arg.coeffs[i] = 0;
                continue;
            }
            all_zero = false;
        }
        if (all_zero) continue;
        ClassExpr part =
            compose(p, left.entry.sphere, left.entry.degree, left.entry.gens[j].name, reduced_arg);
        for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] += left.coeffs[j] * part.coeffs[i];
    }
    return out;
}

ClassExpr FactDb::suspend(const ClassExpr& x) const {
    const Int& p = x.entry.prime;
    int n = x.entry.sphere, m = x.entry.degree;
    GroupEntry target = lookup_group(p, n + 1, m + 1);
    ClassExpr out{target, std::vector<Int>(target.gens.size(), 0)};
    if (target.is_zero()) return out;
    const SuspensionFact* fact = nullptr;
    for (const auto& f : suspensions_)
        if (f.prime == p && f.sphere == n && f.degree == m) {
            fact = &f;
            break;
        }
    for (std::size_t i = 0; i < x.coeffs.size(); ++i) {
        if (x.coeffs[i] == 0) continue;
        const Generator& g = x.entry.gens[i];
        bool done = false;
        if (fact)
            for (const auto& [src, img] : fact->images)
                if (src == g.name) {
                    ClassExpr val = parse_expr(target, img);
                    for (std::size_t jj = 0; jj < out.coeffs.size(); ++jj)
                        out.coeffs[jj] += x.coeffs[i] * val.coeffs[jj];
                    done = true;
                    break;
                }
        if (done) continue;
        for (std::size_t jj = 0; jj < target.gens.size(); ++jj)
            if (target.gens[jj].family == g.family) {
                out.coeffs[jj] += x.coeffs[i];
                done = true;
                break;
            }
        if (!done)
            throw MissingFact("missing suspension image for " + g.name + " (p=" + (p == 2 ? std::string("2") : std::string("3")) +
                              ", S^" + std::to_string(n) + " -> S^" + std::to_string(n + 1) + ")");
    }
    return out;
}

bool FactDb::suspension_is_epi(const Int& p, int n, int m) const {
    for (const auto& f : suspensions_)
        if (f.prime == p && f.sphere == n && f.degree == m) return f.epi;
    if (m <= 2 * n - 1) return true;  // Freudenthal
    // trivially epi onto the zero group
    GroupEntry t = lookup_group(p, n + 1, m + 1);
    return t.is_zero();
}

std::optional<WhiteheadFact> FactDb::whitehead(const Int& p, const std::string& expr) const {
    for (const auto& f : whitehead_)
        if (f.prime == p && f.expr == expr) return f;
    return std::nullopt;
}

std::vector<GoalFact> FactDb::goal_facts(const Int& p, int r, int k) const {
    std::vector<GoalFact> out;
    for (const auto& f : goal_facts_)
        if (f.prime == p && f.r == r && f.k_min <= k && k <= f.k_max) out.push_back(f);
    return out;
}

bool FactDb::fibre_split(const Int& p, int k, int degree) const {
    for (const auto& f : splits_)
        if (f.prime == p && f.k == k && f.degree == degree) return true;
    return false;
}

std::optional<StableHp2> FactDb::stable_hp2(const Int& p, int r) const {
    for (const auto& f : stable_hp2_)
        if (f.prime == p && f.r == r) return f;
    return std::nullopt;
}

std::vector<BoundarySpanFact> FactDb::boundary_spans(const Int& p, int k, int degree,
                                                     const std::string& branch) const {
    std::vector<BoundarySpanFact> out;
    for (const auto& f : spans_)
        if (f.prime == p && f.k == k && f.degree == degree && (f.branch.empty() || f.branch == branch))
            out.push_back(f);
    return out;
}

FactDb::Indeterminacy FactDb::bracket_indeterminacy(const Int& p, int alpha_sphere, int alpha_degree,
                                                    const std::string& alpha, int beta_degree,
                                                    const Int& beta_coeff,
                                                    const std::string& /*beta*/,
                                                    int gamma_degree, const Int& gamma_coeff,
                                                    const std::string& gamma) const {
    // the indeterminacy depends on beta only through its domain sphere
    (void)beta_coeff;
    // bracket <alpha, beta, gamma> with alpha: S^{alpha_degree} -> S^{alpha_sphere},
    // beta in pi_{beta_degree}(S^{alpha_degree}), gamma in pi_{gamma_degree}(S^{beta_degree}).
    // Target group: pi_{gamma_degree+1}(S^{alpha_sphere}).
    Indeterminacy out;
    int target_deg = gamma_degree + 1;
    out.target = lookup_group(p, alpha_sphere, target_deg);
    if (out.target.is_zero()) return out;
    // first part: pi_{gamma_degree+1-?}: [S^{beta_degree+1} part] o Sigma gamma
    GroupEntry left_grp = lookup_group(p, alpha_sphere, beta_degree + 1);
    for (std::size_t i = 0; i < left_grp.gens.size(); ++i) {
        ClassExpr g{left_grp, std::vector<Int>(left_grp.gens.size(), 0)};
        g.coeffs[i] = 1;
        // compose with Sigma(gamma): gamma at sphere beta_degree -> suspend once
        GroupEntry gam_entry = lookup_group(p, beta_degree, gamma_degree);
        auto gi = gam_entry.find(gamma);
        if (!gi) {
            out.complete = false;
            out.flags.push_back("gamma " + gamma + " not found in pi_" + std::to_string(gamma_degree) +
                                "(S^" + std::to_string(beta_degree) + ")");
            break;
        }
        ClassExpr gam{gam_entry, std::vector<Int>(gam_entry.gens.size(), 0)};
        gam.coeffs[*gi] = gamma_coeff;
        ClassExpr sgam = suspend(gam);
        try {
            ClassExpr composed = compose_expr(g, sgam);
            if (!composed.is_zero()) out.gens.push_back(composed);
        } catch (const MissingFact& e) {
            out.complete = false;
            out.flags.push_back(e.what());
        }
    }
    // second part: alpha o pi_{target_deg}(S^{alpha_degree})
    GroupEntry mid = lookup_group(p, alpha_degree, target_deg);
    for (std::size_t i = 0; i < mid.gens.size(); ++i) {
        ClassExpr g{mid, std::vector<Int>(mid.gens.size(), 0)};
        g.coeffs[i] = 1;  // alpha o (whole group)
        try {
            ClassExpr composed = compose(p, alpha_sphere, alpha_degree, alpha, g);
            if (!composed.is_zero()) out.gens.push_back(composed);
        } catch (const MissingFact& e) {
            out.complete = false;
            out.flags.push_back(e.what());
        }
    }
    return out;
}

std::vector<Violation> FactDb::validate() const {
    std::vector<Violation> out;
    for (const auto& e : groups_) {
        std::set<std::string> seen;
        for (const auto& g : e.gens)
            if (!seen.insert(g.name).second)
                out.push_back({"duplicate generator name " + g.name + " in entry (" +
                               std::to_string(e.sphere) + "," + std::to_string(e.degree) + ")"});
        // canonical listing: free generators first, torsion in descending order
        bool seen_torsion = false;
        unsigned last = 0;
        for (const auto& g : e.gens) {
            if (!g.order_exp) {
                if (seen_torsion)
                    out.push_back({"free generator listed after torsion in entry (" +
                                   std::to_string(e.sphere) + "," + std::to_string(e.degree) + ")"});
                continue;
            }
            if (seen_torsion && *g.order_exp > last)
                out.push_back({"torsion generators not in descending order in entry (" +
                               std::to_string(e.sphere) + "," + std::to_string(e.degree) + ")"});
            seen_torsion = true;
            last = *g.order_exp;
        }
    }
    for (const auto& e : groups_) {
        // stable-range entries must agree with the stem recorded once
        if (e.degree - e.sphere <= e.sphere - 2 && e.degree > e.sphere) {
            try {
                GroupEntry stable = materialize_stable(e.prime, e.sphere, e.degree);
                if (!(stable.module() == e.module()))
                    out.push_back({"entry (" + std::to_string(e.sphere) + "," +
                                   std::to_string(e.degree) +
                                   ") lies in the stable range but disagrees with the stem record"});
            } catch (const MissingFact&) {
            }
        }
    }
    for (const auto& f : compositions_) {
        GroupEntry right_entry, target;
        try {
            right_entry = lookup_group(f.prime, f.left_degree, f.right_degree);
            target = lookup_group(f.prime, f.left_sphere, f.right_degree);
        } catch (const MissingFact& e) {
            out.push_back({std::string("composition fact references missing entry: ") + e.what()});
            continue;
        }
        auto ri = right_entry.find(f.right);
        if (!ri) {
            out.push_back({"composition fact right class " + f.right + " not in pi_" +
                           std::to_string(f.right_degree) + "(S^" + std::to_string(f.left_degree) + ")"});
            continue;
        }
        ClassExpr val;
        try {
            val = parse_expr(target, f.result);
        } catch (const DbError& e) {
            out.push_back({std::string("composition result outside group: ") + e.what()});
            continue;
        }
        // order coherence: ord(left o right) divides ord(right)
        auto ro = right_entry.gens[*ri].order_exp;
        if (ro) {
            auto vo = val.order();
            if (!vo) {
                out.push_back({"composition " + f.left + " o " + f.right +
                               " claims infinite order from a finite class"});
            } else if (*vo > int_pow(f.prime, *ro)) {
                out.push_back({"composition " + f.left + " o " + f.right + " has order " + vo->str() +
                               " exceeding ord(" + f.right + ")"});
            }
        }
    }
    for (const auto& f : suspensions_) {
        GroupEntry src, dst;
        try {
            src = lookup_group(f.prime, f.sphere, f.degree);
            dst = lookup_group(f.prime, f.sphere + 1, f.degree + 1);
        } catch (const MissingFact& e) {
            out.push_back({std::string("suspension fact references missing entry: ") + e.what()});
            continue;
        }
        for (const auto& [name, img] : f.images) {
            auto si = src.find(name);
            if (!si) {
                out.push_back({"suspension fact maps unknown class " + name});
                continue;
            }
            ClassExpr val;
            try {
                val = parse_expr(dst, img);
            } catch (const DbError& e) {
                out.push_back({std::string("suspension image outside group: ") + e.what()});
                continue;
            }
            auto so = src.gens[*si].order_exp;
            auto vo = val.order();
            if (so && !vo)
                out.push_back({"suspension of finite class " + name + " claims infinite order"});
            else if (so && vo && *vo > int_pow(f.prime, *so))
                out.push_back({"suspension image of " + name + " has order exceeding the source"});
            else if (f.mono && so && vo && *vo != int_pow(f.prime, *so))
                out.push_back({"suspension flagged mono but does not preserve ord(" + name + ")"});
        }
    }
    for (const auto& f : goal_facts_) {
        if (f.kind == "order_geq" || f.kind == "order_exact_lift" || f.kind == "order_geq_lift" ||
            f.kind == "no_element_of_order") {
            Int v = f.value;
            if (v <= 1) {
                out.push_back({"goal fact with non-p-power bound for r=" + std::to_string(f.r)});
                continue;
            }
            while (v % f.prime == 0) v /= f.prime;
            if (v != 1) out.push_back({"goal fact bound not a power of p for r=" + std::to_string(f.r)});
        }
    }
    return out;
}

}  // namespace hpstems::factdb
