#include "hpstems/apps.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hpstems::apps {

using alg::LocalScalar;
using engine::NamedModule;
using engine::quotient_by;

namespace {

std::string p1_str(const cw::GradedModP& g) {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < g.p1.size(); ++i) {
        for (auto& [c, t] : g.p1[i]) {
            if (!first) os << ", ";
            os << "P1(" << g.basis[i].first << ") = ";
            if (c != 1) os << c << " ";
            os << g.basis[t].first;
            first = false;
        }
    }
    if (first) return "trivial";
    return os.str();
}

std::string degrees_str(const cw::GradedModP& g) {
    std::ostringstream os;
    auto degs = g.degrees();
    os << "{";
    for (std::size_t i = 0; i < degs.size(); ++i) {
        if (i) os << ",";
        os << degs[i];
    }
    os << "}";
    return os.str();
}

}  // namespace

std::string SmashReport::render() const {
    std::ostringstream os;
    os << "plus part:  degrees " << degrees_str(plus) << "  P1: " << p1_str(plus) << "\n";
    os << "            ~ " << plus_id << "\n";
    os << "minus part: degrees " << degrees_str(minus) << "  P1: " << p1_str(minus) << "\n";
    os << "            ~ " << minus_id << "\n";
    return os.str();
}

SmashReport smash_report(const cw::GradedModP& hx) {
    cw::SmashSplit split = cw::smash_square_split(hx);
    SmashReport rep;
    rep.plus = split.plus;
    rep.minus = split.minus;
    rep.plus_id = cw::identify_summand(split.plus);
    rep.minus_id = cw::identify_summand(split.minus);
    // a six-cell minus part with the Sigma^5 HP^2 pattern below degree 14
    if (rep.minus.basis.size() == 6) {
        bool has9 = false, has13 = false, p1_13_to_9 = false;
        for (std::size_t i = 0; i < rep.minus.basis.size(); ++i) {
            if (rep.minus.basis[i].second == 9) has9 = true;
            if (rep.minus.basis[i].second == 13) {
                has13 = true;
                for (auto& [c, t] : rep.minus.p1[i])
                    if (rep.minus.basis[t].second == 9) p1_13_to_9 = true;
            }
        }
        if (has9 && has13 && p1_13_to_9)
            rep.minus_id = "6-cell complex Y with sk_13(Y) = Sigma^5 HP^2";
    }
    return rep;
}

cw::GradedModP load_graded(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cw::CwError("cannot open homology file: " + path);
    cw::GradedModP h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto j = nlohmann::ordered_json::parse(line);
        if (j.value("kind", "") != "graded") continue;
        h.prime = Int(j.at("prime").get<int>());
        for (auto& b : j.at("basis"))
            h.basis.emplace_back(b.at(0).get<std::string>(), b.at(1).get<int>());
        h.p1.assign(h.basis.size(), {});
        auto index = [&](const std::string& name) -> std::size_t {
            for (std::size_t i = 0; i < h.basis.size(); ++i)
                if (h.basis[i].first == name) return i;
            throw cw::CwError("P1 references unknown basis element " + name);
        };
        for (auto& row : j.value("p1", nlohmann::ordered_json::array()))
            h.p1[index(row.at(0).get<std::string>())].emplace_back(
                Int(row.at(1).get<long long>()), index(row.at(2).get<std::string>()));
    }
    if (h.basis.empty()) throw cw::CwError("no graded document in " + path);
    return h;
}

SmashReport smash_report(const std::string& space, const Int& p) {
    if (space == "HP2") return smash_report(cw::GradedModP::hp(2, p));
    if (space == "HP3") return smash_report(cw::GradedModP::hp(3, p));
    cw::GradedModP h = load_graded(space);
    if (h.prime != p) throw cw::CwError("homology file prime disagrees with --prime");
    return smash_report(h);
}

namespace {

FgModule quotient_of(const NamedModule& m, const std::vector<std::vector<LocalScalar>>& span) {
    return quotient_by(m.mod, m.names, span).module.mod;
}

std::vector<LocalScalar> vec(const FgModule& m, std::initializer_list<int> coords) {
    std::vector<LocalScalar> out;
    for (int c : coords) out.push_back(LocalScalar(c));
    while (out.size() < m.gen_count()) out.push_back(LocalScalar(0));
    return out;
}

}  // namespace

std::string ClassifyResult::render() const {
    std::ostringstream os;
    os << "k = " << k << ": " << sporadic.size() << " sporadic type(s)";
    if (!families.empty()) os << " + " << families.size() << " one-parameter families";
    os << "\n";
    os << "type                                   skeleton            attach           pi_{11+k}       P1 pattern\n";
    for (const auto& t : sporadic) {
        os.width(38);
        os << std::left << t.name;
        os.width(20);
        os << std::left << t.skeleton;
        os.width(17);
        os << std::left << t.attach;
        os.width(16);
        os << std::left << t.pi_top.str();
        os << t.p1_pattern << "\n";
        os.width(0);
    }
    for (const auto& f : families)
        os << f.name << " (t in N): pi_{11+k} = " << f.pi_formula << "\n";
    return os.str();
}

ClassifyResult classify_suspended_hp3(const engine::Engine& eng, int k) {
    if (k < 1) throw engine::EngineError("classification requires k >= 1 (and p = 3)");
    const Int p = 3;
    ClassifyResult out;
    out.k = k;
    std::string s4k = std::to_string(4 + k), s8k = std::to_string(8 + k), s12k = std::to_string(12 + k);

    // Skeleton X1 = Sigma^k HP2: pi_{11+k}(X1) from the engine.
    auto d = eng.derive_pi(11, k, p);
    if (d.status != engine::Derivation::Status::Unique)
        throw engine::EngineError("classification needs pi_{11+k}(Sigma^k HP2) determined");
    FgModule pi_x1 = d.result;  // Z/9<h> (+ Z_(3)<u> at k = 4)
    std::vector<std::string> x1_names;
    if (pi_x1.free_rank == 1) x1_names = {"u", "h"};
    else
        x1_names = {"h"};
    NamedModule X1 = NamedModule::of(pi_x1, x1_names);
    bool has_u = pi_x1.free_rank == 1;

    std::string hp2skel = "Sigma^" + std::to_string(k) + " HP2";
    std::string p1_both = "P1[" + s8k + "]!=0, P1[" + s12k + "]!=0";
    std::string p1_bottom = "P1[" + s8k + "]!=0, P1[" + s12k + "]=0";
    std::string p1_top = "P1[" + s8k + "]=0, P1[" + s12k + "]!=0";
    std::string p1_none = "P1[" + s8k + "]=0, P1[" + s12k + "]=0";

    auto x1_quotient = [&](int h_coeff) {
        std::vector<std::vector<LocalScalar>> span;
        if (h_coeff != 0) span.push_back(has_u ? vec(pi_x1, {0, h_coeff}) : vec(pi_x1, {h_coeff}));
        return quotient_of(X1, span);
    };

    out.sporadic.push_back({"Sigma^" + std::to_string(k) + " HP3", hp2skel, "Sigma^k h",
                            x1_quotient(1), p1_both});
    out.sporadic.push_back({hp2skel + " u_{3 Sigma^k h} e^" + s12k, hp2skel, "3 Sigma^k h",
                            x1_quotient(3), p1_bottom});
    out.sporadic.push_back({hp2skel + " v S^" + s12k, hp2skel, "0", x1_quotient(0), p1_bottom});

    // Skeleton X0 = S^{4+k} v S^{8+k}: pi_{11+k} = Z/3<alpha2> + Z/3<alpha1>
    // (plus a free James part at k = 4 on S^8, which the wedge types never touch).
    FgModule pi_x0 = k == 4 ? FgModule(p, 1, {1, 1}) : FgModule(p, 0, {1, 1});
    std::vector<std::string> x0_names;
    if (pi_x0.free_rank == 1) x0_names = {"w", "alpha2", "alpha1"};
    else
        x0_names = {"alpha2", "alpha1"};
    NamedModule X0 = NamedModule::of(pi_x0, x0_names);
    std::string wskel = "S^" + s4k + " v S^" + s8k;
    auto x0_quotient = [&](int a2, int a1) {
        std::vector<std::vector<LocalScalar>> span;
        if (a2 != 0 || a1 != 0)
            span.push_back(pi_x0.free_rank == 1 ? vec(pi_x0, {0, a2, a1}) : vec(pi_x0, {a2, a1}));
        return quotient_of(X0, span);
    };
    out.sporadic.push_back({"Sigma^" + std::to_string(k - 1) + " A v S^" + s8k, wskel, "alpha2",
                            x0_quotient(1, 0), p1_none});
    out.sporadic.push_back({"S^" + s4k + " v Sigma^" + s4k + " HP2", wskel, "alpha1",
                            x0_quotient(0, 1), p1_top});
    out.sporadic.push_back({"(S^" + s4k + " v S^" + s8k + ") u_{c_k} e^" + s12k, wskel,
                            "alpha2 + alpha1", x0_quotient(1, 1), p1_top});
    out.sporadic.push_back({wskel + " v S^" + s12k, wskel, "0", x0_quotient(0, 0), p1_none});

    if (k == 4) {
        out.families.push_back({"C_{3^t u}", "Z/9 + Z/3^t"});
        out.families.push_back({"C_{3^t u + Sigma^4 h}", "Z/3^{t+2}"});
        out.families.push_back({"C_{3^t u + 3 Sigma^4 h}", "Z/3^{t+1} + Z/3"});
    }
    return out;
}

}  // namespace hpstems::apps
