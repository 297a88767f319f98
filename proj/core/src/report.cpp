#include "mm/report.hpp"

namespace mm {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "pass") return Verdict::pass;
    if (s == "fail") return Verdict::fail;
    if (s == "inconclusive") return Verdict::inconclusive;
    throw ConfigError("unknown verdict: " + s);
}

nlohmann::json CheckReport::to_json() const {
    nlohmann::json j;
    j["verdict"] = to_string(verdict);
    j["margin"] = margin;  // non-finite margins serialize as null
    if (!witness.is_null()) j["witness"] = witness;
    if (!note.empty()) j["note"] = note;
    if (!details.is_null()) j["details"] = details;
    if (!mode.empty()) {
        j["mode"] = mode;
        j["seed"] = seed;
    }
    return j;
}

CheckReport CheckReport::pass_with(double margin) {
    CheckReport r;
    r.verdict = Verdict::pass;
    r.margin = margin;
    return r;
}

CheckReport CheckReport::fail_with(double margin, nlohmann::json witness) {
    CheckReport r;
    r.verdict = Verdict::fail;
    r.margin = margin;
    r.witness = std::move(witness);
    return r;
}

CheckReport CheckReport::inconclusive_with(std::string note) {
    CheckReport r;
    r.verdict = Verdict::inconclusive;
    r.note = std::move(note);
    return r;
}

}  // namespace mm
