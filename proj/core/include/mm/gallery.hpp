#pragma once

#include "mm/convex.hpp"
#include "mm/core.hpp"
#include "mm/monotone.hpp"
#include "mm/report.hpp"

#include <optional>
#include <string>
#include <vector>

// Built-in catalog of worked instances, each bundled with the verdicts its
// checks are expected to produce. The catalog doubles as the golden fixture
// suite and as the backing store of the `gallery` CLI command.

namespace mm::gallery {

struct ExpectedCheck {
    std::string op;          // a check from the monotone or convex module
    nlohmann::json params;   // e.g. {"n":3} or {"resolvent_of":1}
    Verdict expected = Verdict::pass;
};

struct GalleryCase {
    std::string id;
    GammaSet gamma;
    std::optional<SplittingTuple> tuple;
    std::vector<ExpectedCheck> expected;
    std::optional<Grid> sample_grid;  // parameter grid for linear bodies
    std::vector<Grid> grids;          // per-marginal grids for splitting sweeps
    nlohmann::json notes;
};

/// Commuting positive definite family: Gamma = {(Q_1 v,...,Q_N v)} with the
/// quadratic tuple q_{M_i}, M_i = (sum_{k != i} Q_k) Q_i^{-1}.
GalleryCase make_quadratic_family(const std::vector<Eigen::MatrixXd>& Q);

/// One-dimensional curve family Gamma = {(alpha_1(t),...,alpha_N(t))} with the
/// antiderivative tuple; the finite body samples the curve at `t_samples`.
GalleryCase make_curve_family(const std::vector<MonotoneTable>& alphas,
                              const std::vector<double>& t_samples);

/// Three 2-d marginals whose two-marginal projections all fail monotonicity
/// while the set itself is c-monotone and maximal.
GalleryCase make_example_54();

/// Embedding of a sampled monotone graph into N marginals with constant tails.
GalleryCase make_trivial_embedding(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& A_graph, int N,
    const std::vector<Eigen::VectorXd>& shifts = {});

/// Scaled rotation triple: maximally c-monotone but not 3-c-cyclically monotone.
GalleryCase make_rotation_tripod();

/// 2n scaled rotations that partition the identity into firmly nonexpansive
/// maps whose partial sums fail firm nonexpansiveness; not c-monotone.
GalleryCase make_partition_counterexample(int n, double theta);

struct CheckOutcome {
    std::string op;
    nlohmann::json params;
    Verdict expected;
    Verdict actual;
    CheckReport report;
    bool matched = false;
};

struct CaseRunResult {
    std::string id;
    std::vector<CheckOutcome> checks;
    bool all_matched = false;
    nlohmann::json instance;  // serialized gamma (+ tuple) for downstream use

    nlohmann::json to_json() const;
};

std::vector<std::string> list_ids();
GalleryCase make_case(const std::string& id);
CaseRunResult run_case(const GalleryCase& c);

/// Deterministic probe points for envelope/prox sweeps: uniform in [-2,2]^d.
std::vector<Eigen::VectorXd> default_probes(int d, int count = 100,
                                            std::uint64_t seed = kDefaultSeed);

}  // namespace mm::gallery
