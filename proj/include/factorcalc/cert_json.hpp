#pragma once

#include <json.hpp>

#include "factorcalc/certificate.hpp"

namespace factorcalc {

inline nlohmann::json cert_to_json(const Certificate &cert) {
    nlohmann::json steps = nlohmann::json::array();
    for (auto &s : cert.steps) {
        nlohmann::json bindings = nlohmann::json::object();
        for (auto &[k, v] : s.bindings) bindings[k] = v;
        steps.push_back({{"rule", s.rule},
                         {"anchor", s.law},
                         {"bindings", bindings},
                         {"before", s.before},
                         {"after", s.after}});
    }
    nlohmann::json j = {{"steps", steps}, {"initial", cert.initial}, {"final", cert.final_form}};
    if (!cert.initial_right.empty()) j["initial_right"] = cert.initial_right;
    return j;
}

inline Certificate cert_from_json(const nlohmann::json &j) {
    Certificate cert;
    cert.initial = j.value("initial", "");
    cert.initial_right = j.value("initial_right", "");
    cert.final_form = j.value("final", "");
    for (auto &s : j.at("steps")) {
        CertStep step;
        step.rule = s.value("rule", "");
        step.law = s.value("anchor", "");
        step.before = s.value("before", "");
        step.after = s.value("after", "");
        if (s.contains("bindings"))
            for (auto &[k, v] : s.at("bindings").items())
                step.bindings.emplace_back(k, v.get<std::string>());
        cert.steps.push_back(std::move(step));
    }
    return cert;
}

} // namespace factorcalc
