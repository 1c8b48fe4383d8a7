#pragma once

#include <string>
#include <utility>
#include <vector>

namespace factorcalc {

/// One rewrite step: which rule fired where, with the whole-state text
/// before and after. States print deterministically, so replay can compare
/// texts bit for bit.
struct CertStep {
    std::string rule; // machine id, e.g. "free-trade"
    std::string law;  // the identity the rule applies, in engine syntax
    std::vector<std::pair<std::string, std::string>> bindings;
    std::string before;
    std::string after;
};

struct Certificate {
    std::string initial;
    std::string initial_right; // second reduction chain (isomorphism certificates)
    std::string final_form;
    std::vector<CertStep> steps;

    void append(const Certificate &other) {
        steps.insert(steps.end(), other.steps.begin(), other.steps.end());
    }
};

} // namespace factorcalc
