#pragma once
// The expected main table (2,3-components of pi_{r+k}(Sigma^k HP^2)) and the
// comparison run against the derivation engine.

#include "hpstems/engine.hpp"

#include <string>
#include <vector>

namespace hpstems::table {

using alg::FgModule;
using alg::Int;

// A table cell in compact notation: "inf" = Z, n = Z/n, n^m = (Z/n)^m,
// '+' = direct sum.  Stored canonically: free rank, then 2-torsion and
// 3-torsion exponent multisets.
struct CombinedCell {
    int rank{0};
    std::vector<unsigned> t2, t3;  // exponents, descending

    static CombinedCell parse(const std::string& text);
    static CombinedCell combine(const FgModule& at2, const FgModule& at3);  // ranks must agree
    std::string render() const;
    bool operator==(const CombinedCell& o) const { return rank == o.rank && t2 == o.t2 && t3 == o.t3; }
};

struct ExpectedTable {
    struct Cell {
        int r, k;
        std::string text;
    };
    std::vector<Cell> cells;

    static ExpectedTable load(const std::string& path);
    const Cell* find(int r, int k) const;
};

struct RunReport {
    struct Row {
        int r, k;
        std::string status;  // match | mismatch | ambiguous | missing-fact
        std::string derived, expected;
        long long micros{0};
    };
    std::vector<Row> rows;
    std::string db_hash;
    int exit_code{0};  // 0 match, 1 mismatch, 2 missing fact, 3 ambiguity

    std::string render() const;
};

RunReport compare_table(const engine::Engine& eng, const ExpectedTable& expected);

}  // namespace hpstems::table
