#include "mm/monotone.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mm {
namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

nlohmann::json point_json(const MultiPoint& p) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 1; i <= p.config().N; ++i) a.push_back(vec_json(p.block(i)));
    return a;
}

// Deterministic across platforms, unlike std::uniform_int_distribution.
std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t k) { return rng() % k; }

std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(p[static_cast<std::size_t>(i)],
                  p[static_cast<std::size_t>(rand_below(rng, static_cast<std::uint64_t>(i) + 1))]);
    return p;
}

std::vector<std::vector<int>> all_permutations(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

nlohmann::json perm_json(const std::vector<int>& p) {
    nlohmann::json a = nlohmann::json::array();
    for (int v : p) a.push_back(v + 1);
    return a;
}

Eigen::VectorXd subset_sum(const MultiPoint& p, const std::vector<int>& members) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p.config().d);
    for (int i : members) s += p.coords().col(i - 1);
    return s;
}

// Shared worker so the projection check and the public entry test the same sample.
CheckReport pairwise_c_monotone_on(const std::vector<MultiPoint>& pts, double tol) {
    const std::size_t m = pts.size();
    CheckReport report;
    report.verdict = Verdict::pass;
    if (m < 2) {
        report.note = "fewer than two points: trivially c-monotone";
        return report;
    }
    const int N = pts[0].config().N;
    const auto subsets = proper_subsets_containing_first(N);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const MultiPoint z = pts[a] - pts[b];
            const Eigen::VectorXd total = sum_map(z);
            for (const auto& K : subsets) {
                const Eigen::VectorXd u = subset_sum(z, K.members());
                const double ip = u.dot(total - u);
                report.margin = std::min(report.margin, ip);
                if (ip < -tol) {
                    report.verdict = Verdict::fail;
                    report.witness = {{"point_indices", {a, b}},
                                      {"x", point_json(pts[a])},
                                      {"y", point_json(pts[b])},
                                      {"K", K.members()},
                                      {"inner_product", ip}};
                    return report;
                }
            }
        }
    }
    return report;
}

struct ResolventTable {
    std::vector<Eigen::VectorXd> sums;  // S(x) per materialized point
};

// Detects multivalued samples: equal sums, different blocks.
ResolventTable build_resolvent_table(const std::vector<MultiPoint>& pts, double tol) {
    ResolventTable t;
    t.sums.reserve(pts.size());
    for (const auto& p : pts) t.sums.push_back(sum_map(p));
    const int N = pts.empty() ? 0 : pts[0].config().N;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double close = 1e-12 * (1.0 + t.sums[a].norm());
            if ((t.sums[a] - t.sums[b]).norm() > close) continue;
            for (int i = 1; i <= N; ++i) {
                const double gap = (pts[a].block(i) - pts[b].block(i)).norm();
                if (gap > tol) {
                    CheckReport r;
                    r.verdict = Verdict::fail;
                    r.margin = -gap;
                    r.witness = {{"s", vec_json(t.sums[a])},
                                 {"i", i},
                                 {"x", point_json(pts[a])},
                                 {"y", point_json(pts[b])},
                                 {"block_gap", gap}};
                    r.note = "two points share the block sum but differ in block " +
                             std::to_string(i) + "; the set is not c-monotone";
                    throw WellDefinednessError(std::move(r));
                }
            }
        }
    }
    return t;
}

}  // namespace

GraphPairs extract_AK_graph(const GammaSet& gamma, const IndexSubset& K,
                            const std::optional<Grid>& sample) {
    if (K.space_size() != gamma.config().N)
        throw ConfigError("extract_AK_graph: subset defined over a different N");
    const auto pts = materialize(gamma, sample);
    if (pts.empty()) throw ConfigError("extract_AK_graph: empty sample");
    GraphPairs g;
    g.label = "A_K";
    g.pairs.reserve(pts.size());
    for (const auto& p : pts) {
        const Eigen::VectorXd u = subset_sum(p, K.members());
        g.pairs.emplace_back(u, sum_map(p) - u);
    }
    return g;
}

GraphPairs resolvent_samples(const GammaSet& gamma, int i, const std::optional<Grid>& sample,
                             double tol) {
    if (i < 1 || i > gamma.config().N)
        throw ConfigError("resolvent_samples: index out of range");
    const auto pts = materialize(gamma, sample);
    const auto table = build_resolvent_table(pts, tol);
    GraphPairs g;
    g.label = "J_A_" + std::to_string(i);
    g.pairs.reserve(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
        g.pairs.emplace_back(table.sums[k], pts[k].block(i));
    return g;
}

CheckReport check_graph_monotone(const GraphPairs& g, double tol) {
    CheckReport report;
    report.verdict = Verdict::pass;
    for (std::size_t a = 0; a < g.pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < g.pairs.size(); ++b) {
            const double ip =
                (g.pairs[a].first - g.pairs[b].first).dot(g.pairs[a].second - g.pairs[b].second);
            report.margin = std::min(report.margin, ip);
            if (ip < -tol) {
                report.verdict = Verdict::fail;
                report.witness = {{"indices", {a, b}},
                                  {"u", vec_json(g.pairs[a].first)},
                                  {"v", vec_json(g.pairs[a].second)},
                                  {"u_prime", vec_json(g.pairs[b].first)},
                                  {"v_prime", vec_json(g.pairs[b].second)},
                                  {"inner_product", ip}};
                return report;
            }
        }
    }
    return report;
}

CheckReport check_firmly_nonexpansive(const GraphPairs& samples, double tol) {
    CheckReport report;
    report.verdict = Verdict::pass;
    for (std::size_t a = 0; a < samples.pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < samples.pairs.size(); ++b) {
            const auto& [x, Tx] = samples.pairs[a];
            const auto& [y, Ty] = samples.pairs[b];
            const double lhs = (Tx - Ty).squaredNorm() + ((x - Tx) - (y - Ty)).squaredNorm();
            const double rhs = (x - y).squaredNorm();
            const double slack = rhs - lhs;
            report.margin = std::min(report.margin, slack);
            if (slack < -tol) {
                report.verdict = Verdict::fail;
                report.witness = {{"indices", {a, b}},
                                  {"x", vec_json(x)},
                                  {"Tx", vec_json(Tx)},
                                  {"y", vec_json(y)},
                                  {"Ty", vec_json(Ty)},
                                  {"lhs", lhs},
                                  {"rhs", rhs}};
                return report;
            }
        }
    }
    return report;
}

CheckReport check_pairwise_c_monotone(const GammaSet& gamma, const std::optional<Grid>& sample,
                                      double tol) {
    return pairwise_c_monotone_on(materialize(gamma, sample), tol);
}

CheckReport check_n_c_cyclic(const GammaSet& gamma, int n, const std::optional<Grid>& sample,
                             double tol, std::uint64_t budget, std::uint64_t seed) {
    if (n < 2) throw ConfigError("check_n_c_cyclic: order n must be >= 2");
    if (budget == 0) throw ConfigError("check_n_c_cyclic: budget must be positive");
    const auto pts = materialize(gamma, sample);
    const std::size_t m = pts.size();
    const int N = gamma.config().N;

    std::vector<double> point_cost(m);
    for (std::size_t k = 0; k < m; ++k) point_cost[k] = cost_eval(pts[k]);

    // cost of the tuple assembled blockwise: marginal i taken from pts[choice[i-1]]
    const auto assembled_cost = [&](const std::vector<int>& choice) {
        double total = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                total += pts[static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])]
                             .coords()
                             .col(i)
                             .dot(pts[static_cast<std::size_t>(choice[static_cast<std::size_t>(j)])]
                                      .coords()
                                      .col(j));
        return total;
    };

    // slack of one instance: tuple point indices + one permutation per marginal
    // (sigma_1 = identity; relabeling the cycle index makes that lossless).
    std::vector<int> choice(static_cast<std::size_t>(N));
    const auto slack_of = [&](const std::vector<int>& tuple,
                              const std::vector<const std::vector<int>*>& sigma) {
        double lhs = 0.0, rhs = 0.0;
        for (int j = 0; j < n; ++j) {
            rhs += point_cost[static_cast<std::size_t>(tuple[static_cast<std::size_t>(j)])];
            choice[0] = tuple[static_cast<std::size_t>(j)];
            for (int i = 1; i < N; ++i)
                choice[static_cast<std::size_t>(i)] =
                    tuple[static_cast<std::size_t>((*sigma[static_cast<std::size_t>(i - 1)])
                                                       [static_cast<std::size_t>(j)])];
            lhs += assembled_cost(choice);
        }
        return rhs - lhs;
    };

    const auto make_witness = [&](const std::vector<int>& tuple,
                                  const std::vector<const std::vector<int>*>& sigma,
                                  double slack) {
        nlohmann::json perms = nlohmann::json::array();
        std::vector<int> identity(static_cast<std::size_t>(n));
        std::iota(identity.begin(), identity.end(), 0);
        perms.push_back(perm_json(identity));
        for (const auto* s : sigma) perms.push_back(perm_json(*s));
        nlohmann::json points = nlohmann::json::array();
        for (int t : tuple) points.push_back(point_json(pts[static_cast<std::size_t>(t)]));
        return nlohmann::json{{"tuple_indices", tuple},
                              {"points", points},
                              {"permutations", perms},
                              {"slack", slack}};
    };

    CheckReport report;
    report.seed = seed;

    long double total = 1.0L;
    for (int j = 0; j < n; ++j) total *= static_cast<long double>(m);
    long double nfact = 1.0L;
    for (int j = 2; j <= n; ++j) nfact *= j;
    for (int i = 1; i < N; ++i) total *= nfact;

    if (total <= static_cast<long double>(budget)) {
        report.mode = "exhaustive";
        const auto perms = all_permutations(n);
        std::vector<int> tuple(static_cast<std::size_t>(n), 0);
        std::vector<std::size_t> pidx(static_cast<std::size_t>(N - 1), 0);
        std::vector<const std::vector<int>*> sigma(static_cast<std::size_t>(N - 1));
        report.verdict = Verdict::pass;
        while (true) {
            std::fill(pidx.begin(), pidx.end(), 0);
            while (true) {
                for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] = &perms[pidx[i]];
                const double slack = slack_of(tuple, sigma);
                report.margin = std::min(report.margin, slack);
                if (slack < -tol) {
                    report.verdict = Verdict::fail;
                    report.witness = make_witness(tuple, sigma, slack);
                    return report;
                }
                // odometer over permutation choices, last digit fastest
                std::size_t k = sigma.size();
                while (k > 0 && ++pidx[k - 1] == perms.size()) pidx[--k] = 0;
                if (k == 0) break;
            }
            std::size_t k = tuple.size();
            while (k > 0 && ++tuple[k - 1] == static_cast<int>(m)) tuple[--k] = 0;
            if (k == 0) break;
        }
        return report;
    }

    report.mode = "randomized";
    std::mt19937_64 rng(seed);
    std::vector<int> tuple(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> drawn(static_cast<std::size_t>(N - 1));
    std::vector<const std::vector<int>*> sigma(static_cast<std::size_t>(N - 1));
    for (std::uint64_t trial = 0; trial < budget; ++trial) {
        for (int j = 0; j < n; ++j)
            tuple[static_cast<std::size_t>(j)] = static_cast<int>(rand_below(rng, m));
        for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(N); ++i) {
            drawn[i] = random_permutation(rng, n);
            sigma[i] = &drawn[i];
        }
        const double slack = slack_of(tuple, sigma);
        report.margin = std::min(report.margin, slack);
        if (slack < -tol) {
            report.verdict = Verdict::fail;
            report.witness = make_witness(tuple, sigma, slack);
            report.witness["trial"] = trial;
            return report;
        }
    }
    report.verdict = Verdict::inconclusive;
    report.note = "no violation found in " + std::to_string(budget) +
                  " sampled inequalities; randomized search cannot certify a pass";
    return report;
}

CheckReport check_partition_identity(const GammaSet& gamma, const std::optional<Grid>& sample,
                                     double tol) {
    const auto pts = materialize(gamma, sample);
    const auto table = build_resolvent_table(pts, tol);  // throws on multivalued samples
    const int N = gamma.config().N;

    CheckReport report;
    report.verdict = Verdict::pass;

    // sum of all resolvent samples reproduces the identity (by construction)
    double id_residual = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double r = (sum_map(pts[k]) - table.sums[k]).norm();
        id_residual = std::max(id_residual, r / (1.0 + table.sums[k].norm()));
    }
    report.details["identity_residual"] = id_residual;

    nlohmann::json per_subset = nlohmann::json::array();
    for (const auto& K : proper_subsets_containing_first(N)) {
        GraphPairs partial;
        partial.label = "J_A_K";
        partial.pairs.reserve(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k)
            partial.pairs.emplace_back(table.sums[k], subset_sum(pts[k], K.members()));
        const CheckReport fn = check_firmly_nonexpansive(partial, tol);
        per_subset.push_back({{"K", K.members()},
                              {"verdict", to_string(fn.verdict)},
                              {"margin", fn.margin}});
        report.margin = std::min(report.margin, fn.margin);
        if (fn.failed() && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.witness = {{"K", K.members()}, {"firmly_nonexpansive_witness", fn.witness}};
        }
    }
    report.details["partial_sums"] = per_subset;
    return report;
}

CheckReport check_sum_surjective(const GammaSet& gamma,
                                 const std::vector<Eigen::VectorXd>& targets, double tol) {
    CheckReport report;
    if (gamma.is_finite()) {
        report.verdict = Verdict::inconclusive;
        report.note = "a finite set never has surjective block sum; coverage statistics only";
        std::vector<Eigen::VectorXd> sums;
        for (const auto& p : gamma.points()) sums.push_back(sum_map(p));
        Eigen::VectorXd lo = sums[0], hi = sums[0];
        std::size_t distinct = 0;
        for (std::size_t a = 0; a < sums.size(); ++a) {
            lo = lo.cwiseMin(sums[a]);
            hi = hi.cwiseMax(sums[a]);
            bool dup = false;
            for (std::size_t b = 0; b < a && !dup; ++b)
                dup = (sums[a] - sums[b]).norm() <= 1e-12 * (1.0 + sums[a].norm());
            if (!dup) ++distinct;
        }
        std::size_t hit = 0;
        for (const auto& t : targets)
            for (const auto& s : sums)
                if ((s - t).norm() <= tol * (1.0 + t.norm())) {
                    ++hit;
                    break;
                }
        report.details = {{"point_count", sums.size()},
                          {"distinct_sums", distinct},
                          {"sum_box_lo", vec_json(lo)},
                          {"sum_box_hi", vec_json(hi)},
                          {"targets_hit", hit}};
        return report;
    }

    const auto& maps = gamma.maps();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(gamma.config().d, gamma.config().d);
    for (const auto& Ti : maps) T += Ti;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double sv_max = svd.singularValues()(0);
    const double sv_min = svd.singularValues()(svd.singularValues().size() - 1);
    report.details = {{"smallest_singular_value", sv_min}, {"largest_singular_value", sv_max}};
    report.margin = sv_min;
    if (sv_max > 0.0 && sv_min > tol * sv_max) {
        report.verdict = Verdict::pass;
        nlohmann::json preimages = nlohmann::json::array();
        for (const auto& s : targets) {
            const Eigen::VectorXd v = svd.solve(s);
            Eigen::MatrixXd c(gamma.config().d, gamma.config().N);
            for (int i = 0; i < gamma.config().N; ++i) c.col(i) = maps[static_cast<std::size_t>(i)] * v;
            preimages.push_back({{"target", vec_json(s)},
                                 {"parameter", vec_json(v)},
                                 {"point", point_json(MultiPoint(gamma.config(), c))}});
        }
        report.details["preimages"] = preimages;
    } else {
        report.verdict = Verdict::fail;
        report.witness = {{"sum_matrix_smallest_singular_value", sv_min},
                          {"threshold", tol * sv_max}};
        report.note = "sum matrix T = T_1 + ... + T_N is rank deficient; S(Gamma) != H";
    }
    return report;
}

CheckReport classify_maximality(const GammaSet& gamma, const std::optional<Grid>& sample,
                                double tol) {
    std::optional<Grid> spec = sample;
    if (gamma.is_linear() && !spec) spec = default_param_grid(gamma.config().d);

    const CheckReport mono = check_pairwise_c_monotone(gamma, spec, tol);
    if (mono.failed()) {
        CheckReport report = mono;
        report.note = "precondition failed: sample is not c-monotone";
        return report;
    }

    CheckReport report;
    if (gamma.is_finite()) {
        report.verdict = Verdict::inconclusive;
        report.note = "maximality is not decidable from a finite sample";
        return report;
    }

    const CheckReport surj = check_sum_surjective(gamma, {}, tol);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gamma.maps()[0]);
    const double sv_max = svd.singularValues()(0);
    const double sv_min = svd.singularValues()(svd.singularValues().size() - 1);
    const bool graph_route = sv_max > 0.0 && sv_min > tol * sv_max;

    nlohmann::json certified = nlohmann::json::array();
    if (surj.passed()) certified.push_back("minty_sum_surjectivity");
    if (graph_route) certified.push_back("continuous_graph_over_first_marginal");
    report.details = {{"sum_surjectivity", to_string(surj.verdict)},
                      {"continuous_graph", graph_route ? "pass" : "fail"},
                      {"certified_by", certified}};
    if (surj.passed() || graph_route) {
        report.verdict = Verdict::pass;
        report.margin = surj.passed() ? surj.margin : sv_min;
    } else {
        // neither sufficient criterion applies; maximality itself stays undecided
        report.verdict = Verdict::inconclusive;
        report.note = "no maximality criterion certifies this set";
    }
    return report;
}

CheckReport check_two_marginal_projections(const GammaSet& gamma,
                                           const std::optional<Grid>& sample, double tol) {
    const auto pts = materialize(gamma, sample);
    const int N = gamma.config().N;

    CheckReport report;
    report.verdict = Verdict::pass;
    nlohmann::json per_pair = nlohmann::json::array();
    for (int i = 1; i <= N; ++i) {
        for (int j = i + 1; j <= N; ++j) {
            GraphPairs g;
            g.label = "Gamma_{" + std::to_string(i) + "," + std::to_string(j) + "}";
            g.pairs.reserve(pts.size());
            for (const auto& p : pts) g.pairs.emplace_back(p.block(i), p.block(j));
            const CheckReport r = check_graph_monotone(g, tol);
            per_pair.push_back({{"i", i},
                                {"j", j},
                                {"verdict", to_string(r.verdict)},
                                {"margin", r.margin}});
            report.margin = std::min(report.margin, r.margin);
            if (r.failed() && report.verdict == Verdict::pass) {
                report.verdict = Verdict::fail;
                report.witness = {{"i", i}, {"j", j}, {"monotone_witness", r.witness}};
            }
        }
    }
    report.details["pairs"] = per_pair;

    if (report.passed()) {
        const CheckReport cmono = pairwise_c_monotone_on(pts, tol);
        report.details["c_monotone"] = to_string(cmono.verdict);
        if (!cmono.passed())
            throw std::logic_error(
                "check_two_marginal_projections: all projections monotone but the set failed "
                "the c-monotonicity check");
    }
    return report;
}

}  // namespace mm
