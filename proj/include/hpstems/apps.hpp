#pragma once
// Application layer: smash-square splitting reports and the classification of
// suspended homology quaternionic projective 3-spaces at p = 3.

#include "hpstems/cw.hpp"
#include "hpstems/engine.hpp"

#include <string>
#include <vector>

namespace hpstems::apps {

using alg::FgModule;
using alg::Int;

struct SmashReport {
    cw::GradedModP plus, minus;
    std::string plus_id, minus_id;
    std::string render() const;
};

// space: "HP2" or "HP3" (or a caller-supplied homology).
SmashReport smash_report(const std::string& space, const Int& p);
SmashReport smash_report(const cw::GradedModP& hx);

// JSONL document {"kind":"graded","prime":3,"basis":[["x",4],...],
//                 "p1":[["y",1,"x"],...]}
cw::GradedModP load_graded(const std::string& path);

struct HomotopyType {
    std::string name;
    std::string skeleton;
    std::string attach;
    FgModule pi_top;        // pi_{11+k} of the complex
    std::string p1_pattern;  // e.g. "P1[12+k]!=0, P1[8+k]=0"
};

struct ClassifyResult {
    int k{0};
    std::vector<HomotopyType> sporadic;
    struct Family {
        std::string name;       // e.g. "C_{3^t u}"
        std::string pi_formula;  // e.g. "Z/9 + Z/3^t"
    };
    std::vector<Family> families;
    std::string render() const;
};

ClassifyResult classify_suspended_hp3(const engine::Engine& eng, int k);

}  // namespace hpstems::apps
