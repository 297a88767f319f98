#pragma once

#include "mm/core.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <string>

namespace mm {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// Outcome of a single check: verdict, the smallest slack seen over everything
/// tested, and -- on failure -- a witness that reproduces the violation.
struct CheckReport {
    Verdict verdict = Verdict::inconclusive;
    double margin = std::numeric_limits<double>::infinity();
    nlohmann::json witness;            // null unless a violation was found
    std::string note;                  // optional explanation
    nlohmann::json details;            // optional per-item results
    std::string mode;                  // "exhaustive" | "randomized" when a sweep ran
    std::uint64_t seed = 0;            // meaningful only for randomized sweeps

    bool passed() const { return verdict == Verdict::pass; }
    bool failed() const { return verdict == Verdict::fail; }

    nlohmann::json to_json() const;

    static CheckReport pass_with(double margin);
    static CheckReport fail_with(double margin, nlohmann::json witness);
    static CheckReport inconclusive_with(std::string note);
};

/// Thrown when a resolvent sample is multivalued: two points share the same
/// block sum but differ in a block. Certifies the set is not c-monotone.
struct WellDefinednessError : Error {
    CheckReport report;
    explicit WellDefinednessError(CheckReport r)
        : Error("resolvent samples are not well defined"), report(std::move(r)) {}
};

/// Thrown when an operation's precondition check fails; carries the evidence.
struct PreconditionError : Error {
    CheckReport report;
    PreconditionError(const std::string& msg, CheckReport r)
        : Error(msg), report(std::move(r)) {}
};

}  // namespace mm
