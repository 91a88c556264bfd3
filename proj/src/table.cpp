#include "hpstems/table.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace hpstems::table {

using json = nlohmann::ordered_json;

CombinedCell CombinedCell::parse(const std::string& text) {
    CombinedCell out;
    std::string compact;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) compact.push_back(c);
    if (compact == "0" || compact.empty()) return out;
    std::size_t pos = 0;
    while (pos < compact.size()) {
        std::size_t next = compact.find('+', pos);
        std::string tok = compact.substr(pos, next == std::string::npos ? next : next - pos);
        pos = next == std::string::npos ? compact.size() : next + 1;
        if (tok == "inf") {
            out.rank += 1;
            continue;
        }
        unsigned mult = 1;
        std::size_t caret = tok.find('^');
        if (caret != std::string::npos) {
            mult = static_cast<unsigned>(std::stoul(tok.substr(caret + 1)));
            tok = tok.substr(0, caret);
        }
        Int n(tok);
        if (n <= 1) throw alg::AlgError("bad table cell token: " + tok);
        unsigned e2 = 0, e3 = 0;
        while (n % 2 == 0) {
            n /= 2;
            ++e2;
        }
        while (n % 3 == 0) {
            n /= 3;
            ++e3;
        }
        if (n != 1 || (e2 > 0 && e3 > 0))
            throw alg::AlgError("table cell token is not a prime power at 2 or 3: " + tok);
        for (unsigned i = 0; i < mult; ++i) {
            if (e2 > 0) out.t2.push_back(e2);
            if (e3 > 0) out.t3.push_back(e3);
        }
    }
    std::sort(out.t2.begin(), out.t2.end(), std::greater<unsigned>());
    std::sort(out.t3.begin(), out.t3.end(), std::greater<unsigned>());
    return out;
}

CombinedCell CombinedCell::combine(const FgModule& at2, const FgModule& at3) {
    if (at2.free_rank != at3.free_rank)
        throw alg::AlgError("free ranks disagree between the 2- and 3-local derivations");
    CombinedCell out;
    out.rank = at2.free_rank;
    out.t2 = at2.torsion;
    out.t3 = at3.torsion;
    return out;
}

std::string CombinedCell::render() const {
    if (rank == 0 && t2.empty() && t3.empty()) return "0";
    std::vector<std::string> toks;
    for (int i = 0; i < rank; ++i) toks.push_back("inf");
    auto emit = [&](const std::vector<unsigned>& exps, unsigned p) {
        std::size_t i = 0;
        while (i < exps.size()) {
            std::size_t j = i;
            while (j < exps.size() && exps[j] == exps[i]) ++j;
            Int order = alg::int_pow(Int(p), exps[i]);
            std::ostringstream os;
            os << order;
            if (j - i > 1) os << "^" << (j - i);
            toks.push_back(os.str());
            i = j;
        }
    };
    emit(t2, 2);
    emit(t3, 3);
    std::ostringstream os;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) os << "+";
        os << toks[i];
    }
    return os.str();
}

ExpectedTable ExpectedTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw alg::AlgError("cannot open expected table: " + path);
    ExpectedTable out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        json j = json::parse(line);
        if (j.value("kind", "") != "cell") continue;
        out.cells.push_back({j.at("r").get<int>(), j.at("k").get<int>(), j.at("cell").get<std::string>()});
    }
    return out;
}

const ExpectedTable::Cell* ExpectedTable::find(int r, int k) const {
    for (const auto& c : cells)
        if (c.r == r && c.k == k) return &c;
    return nullptr;
}

std::string RunReport::render() const {
    std::ostringstream os;
    os << "r  k   status        derived                expected           time\n";
    for (const auto& row : rows) {
        os << row.r << "  " << row.k << "   ";
        os.width(12);
        os << std::left << row.status;
        os.width(0);
        os << "  ";
        os.width(20);
        os << std::left << row.derived;
        os.width(0);
        os << "   ";
        os.width(16);
        os << std::left << row.expected;
        os.width(0);
        os << "   " << row.micros << " us\n";
    }
    os << "db " << db_hash << "\n";
    return os.str();
}

RunReport compare_table(const engine::Engine& eng, const ExpectedTable& expected) {
    RunReport rep;
    rep.db_hash = eng.db().version_hash();
    for (const auto& cell : expected.cells) {
        RunReport::Row row{cell.r, cell.k, "", "", cell.text, 0};
        auto start = std::chrono::steady_clock::now();
        try {
            auto d2 = eng.derive_pi(cell.r, cell.k, 2);
            auto d3 = eng.derive_pi(cell.r, cell.k, 3);
            if (d2.status == engine::Derivation::Status::MissingFact) {
                row.status = "missing-fact";
                row.derived = d2.missing;
                rep.exit_code = std::max(rep.exit_code, 2);
            } else if (d3.status == engine::Derivation::Status::MissingFact) {
                row.status = "missing-fact";
                row.derived = d3.missing;
                rep.exit_code = std::max(rep.exit_code, 2);
            } else if (d2.status != engine::Derivation::Status::Unique ||
                       d3.status != engine::Derivation::Status::Unique) {
                row.status = "ambiguous";
                rep.exit_code = std::max(rep.exit_code, 3);
            } else {
                CombinedCell got = CombinedCell::combine(d2.result, d3.result);
                CombinedCell want = CombinedCell::parse(cell.text);
                row.derived = got.render();
                if (got == want) {
                    row.status = "match";
                } else {
                    row.status = "mismatch";
                    rep.exit_code = std::max(rep.exit_code, 1);
                }
            }
        } catch (const std::exception& e) {
            row.status = "missing-fact";
            row.derived = e.what();
            rep.exit_code = std::max(rep.exit_code, 2);
        }
        row.micros = std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace hpstems::table
