#include "mm/gallery.hpp"

#include "mm/json_io.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mm::gallery {
namespace {

Eigen::Matrix2d rot(double theta) {
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R;
}

MonotoneTable tabulate(double (*fn)(double), double lo, double hi, int n) {
    std::vector<double> ts(static_cast<std::size_t>(n)), vals(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        ts[static_cast<std::size_t>(k)] = lo + k * (hi - lo) / (n - 1);
        vals[static_cast<std::size_t>(k)] = fn(ts[static_cast<std::size_t>(k)]);
    }
    return MonotoneTable(std::move(ts), std::move(vals));
}

}  // namespace

std::vector<Eigen::VectorXd> default_probes(int d, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto uniform = [&rng]() {
        return -2.0 + 4.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    std::vector<Eigen::VectorXd> probes;
    probes.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd s(d);
        for (int a = 0; a < d; ++a) s[a] = uniform();
        probes.push_back(std::move(s));
    }
    return probes;
}

GalleryCase make_quadratic_family(const std::vector<Eigen::MatrixXd>& Q) {
    const int N = static_cast<int>(Q.size());
    if (N < 2) throw ConfigError("make_quadratic_family: need at least two matrices");
    const int d = static_cast<int>(Q[0].rows());
    for (const auto& Qi : Q) {
        if (Qi.rows() != d || Qi.cols() != d)
            throw ConfigError("make_quadratic_family: matrices must share one size");
        const double scale = 1.0 + Qi.cwiseAbs().maxCoeff();
        if ((Qi - Qi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ConfigError("make_quadratic_family: matrices must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Qi);
        if (eig.eigenvalues().minCoeff() <= 1e-12 * scale)
            throw ConfigError("make_quadratic_family: matrices must be positive definite");
    }
    for (std::size_t i = 0; i < Q.size(); ++i) {
        for (std::size_t j = i + 1; j < Q.size(); ++j) {
            const double comm = (Q[i] * Q[j] - Q[j] * Q[i]).cwiseAbs().maxCoeff();
            const double scale =
                1.0 + Q[i].cwiseAbs().maxCoeff() * Q[j].cwiseAbs().maxCoeff();
            if (comm > 1e-10 * scale)
                throw ConfigError("make_quadratic_family: matrices must pairwise commute");
        }
    }

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (const auto& Qi : Q) sum += Qi;
    std::vector<ConvexFn> funcs;
    for (const auto& Qi : Q) {
        Eigen::MatrixXd Mi = (sum - Qi) * Qi.inverse();
        Mi = 0.5 * (Mi + Mi.transpose());  // exact in theory, tidy in floating point
        funcs.push_back(make_quadratic(std::move(Mi)));
    }

    const SpaceConfig config(N, d);
    GalleryCase c{
        "quadratic_family",
        GammaSet(config, Q),
        SplittingTuple(config, std::move(funcs)),
        {
            {"check_pairwise_c_monotone", {}, Verdict::pass},
            {"classify_maximality", {}, Verdict::pass},
            {"check_prox_partition", {}, Verdict::pass},
            {"check_envelope_criterion", {}, Verdict::pass},
            {"check_subdiff_identity", {}, Verdict::pass},
        },
        default_param_grid(d),
        {},
        {}};
    return c;
}

GalleryCase make_curve_family(const std::vector<MonotoneTable>& alphas,
                              const std::vector<double>& t_samples) {
    const int N = static_cast<int>(alphas.size());
    if (N < 2) throw ConfigError("make_curve_family: need at least two maps");
    if (t_samples.empty()) throw ConfigError("make_curve_family: need sample parameters");
    const SpaceConfig config(N, 1);

    std::vector<MultiPoint> pts;
    for (double t : t_samples) {
        std::vector<Eigen::VectorXd> blocks;
        for (const auto& a : alphas) {
            Eigen::VectorXd b(1);
            b[0] = a(t);
            blocks.push_back(std::move(b));
        }
        pts.emplace_back(config, blocks);
    }

    std::vector<ConvexFn> funcs;
    std::vector<Grid> grids;
    for (int i = 1; i <= N; ++i) {
        funcs.push_back(make_curve_antiderivative(alphas, i));
        // per-marginal grid: the antiderivative's domain, shrunk away from the edges
        double t_lo = alphas[0].t_min(), t_hi = alphas[0].t_max();
        for (const auto& a : alphas) {
            t_lo = std::max(t_lo, a.t_min());
            t_hi = std::min(t_hi, a.t_max());
        }
        const double x_lo = alphas[static_cast<std::size_t>(i - 1)](t_lo);
        const double x_hi = alphas[static_cast<std::size_t>(i - 1)](t_hi);
        const double pad = 0.05 * (x_hi - x_lo);
        grids.push_back(Grid::uniform(1, x_lo + pad, x_hi - pad, 41));
    }

    const nlohmann::json tol{{"tol", 1e-6}};
    GalleryCase c{"curve_family",
                  GammaSet(config, std::move(pts)),
                  SplittingTuple(config, std::move(funcs)),
                  {
                      {"check_splitting_inequality", tol, Verdict::pass},
                      {"check_subdiff_identity", tol, Verdict::pass},
                      {"check_pairwise_c_monotone", {}, Verdict::pass},
                  },
                  std::nullopt,
                  std::move(grids),
                  {}};
    return c;
}

GalleryCase make_example_54() {
    const SpaceConfig config(3, 2);
    Eigen::Matrix2d T1, T2, T3;
    T1 << 1, 0, 0, 0;
    T2 << 2, -1, 2, -1;
    T3 << 0, 1, 7, -5;

    Eigen::Matrix2d M1, M2, M3;
    M1 << 2, 0, 0, 0;
    M2 = 2.0 * Eigen::Matrix2d::Identity();
    M3 << 8.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0;
    Eigen::MatrixXd B1(2, 1), B2(2, 1);
    B1 << 1, 0;
    B2 << 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2;

    std::vector<ConvexFn> funcs;
    funcs.push_back(make_subspace_quadratic(B1, M1));
    funcs.push_back(make_subspace_quadratic(B2, M2));
    funcs.push_back(make_quadratic(M3));

    // the 5-node lattice cannot expose the Gamma_{2,3} violation (it needs a
    // parameter-difference ratio strictly between 7/4 and 2), so sample denser
    const Grid sample = Grid::uniform(2, -2.0, 2.0, 21);

    GalleryCase c{"example_54",
                  GammaSet(config, std::vector<Eigen::MatrixXd>{T1, T2, T3}),
                  SplittingTuple(config, std::move(funcs)),
                  {
                      {"check_two_marginal_projections", {}, Verdict::fail},
                      {"check_pairwise_c_monotone", {}, Verdict::pass},
                      {"classify_maximality", {}, Verdict::pass},
                      {"check_splitting_inequality", {}, Verdict::pass},
                      {"check_subdiff_identity", {}, Verdict::pass},
                  },
                  sample,
                  {},
                  {}};
    return c;
}

GalleryCase make_trivial_embedding(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& A_graph, int N,
    const std::vector<Eigen::VectorXd>& shifts) {
    if (A_graph.empty()) throw ConfigError("make_trivial_embedding: empty graph");
    if (N < 2) throw ConfigError("make_trivial_embedding: N must be >= 2");
    const int d = static_cast<int>(A_graph[0].first.size());
    const SpaceConfig config(N, d);

    GraphPairs g;
    g.label = "A";
    g.pairs = A_graph;
    const CheckReport mono = check_graph_monotone(g);
    if (!mono.passed())
        throw PreconditionError("make_trivial_embedding: the sampled graph is not monotone",
                                mono);

    std::vector<Eigen::VectorXd> tail = shifts;
    if (tail.empty()) tail.assign(static_cast<std::size_t>(N - 2), Eigen::VectorXd::Zero(d));
    if (static_cast<int>(tail.size()) != N - 2)
        throw ConfigError("make_trivial_embedding: need one shift per tail marginal");

    std::vector<MultiPoint> pts;
    for (const auto& [x1, x2] : A_graph) {
        std::vector<Eigen::VectorXd> blocks{x1, x2};
        for (const auto& rho : tail) blocks.push_back(rho);
        pts.emplace_back(config, blocks);
    }

    GalleryCase c{"trivial_embedding",
                  GammaSet(config, std::move(pts)),
                  std::nullopt,
                  {
                      {"check_pairwise_c_monotone", {}, Verdict::pass},
                      {"classify_maximality", {}, Verdict::inconclusive},
                  },
                  std::nullopt,
                  {},
                  {{"tail_projections", "singletons for all pairs i,j >= 3"}}};
    return c;
}

GalleryCase make_rotation_tripod() {
    const SpaceConfig config(3, 2);
    const Eigen::Matrix2d T1 = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d T23 = 0.5 * std::sqrt(3.0) * rot(-std::numbers::pi / 2);

    GalleryCase c{"rotation_tripod",
                  GammaSet(config, std::vector<Eigen::MatrixXd>{T1, T23, T23}),
                  std::nullopt,
                  {
                      {"check_pairwise_c_monotone", {}, Verdict::pass},
                      {"classify_maximality", {}, Verdict::pass},
                      {"check_n_c_cyclic", {{"n", 3}}, Verdict::fail},
                      {"check_partition_identity", {}, Verdict::pass},
                      {"check_two_marginal_projections", {}, Verdict::pass},
                      {"check_firmly_nonexpansive", {{"resolvent_of", 1}}, Verdict::pass},
                      {"check_firmly_nonexpansive", {{"resolvent_of", 2}}, Verdict::pass},
                      {"check_firmly_nonexpansive", {{"resolvent_of", 3}}, Verdict::pass},
                  },
                  default_param_grid(2),
                  {},
                  {}};
    return c;
}

GalleryCase make_partition_counterexample(int n, double theta) {
    if (n < 2) throw ConfigError("make_partition_counterexample: n must be >= 2");
    const double lower = std::acos(1.0 / std::numbers::sqrt2);
    const double upper = std::acos(1.0 / std::sqrt(2.0 * n));
    if (!(theta > lower) || theta > upper + 1e-12)
        throw ConfigError(
            "make_partition_counterexample: theta outside ]acos(1/sqrt(2)), acos(1/sqrt(2n))]");
    const double alpha = 1.0 / (2.0 * n * std::cos(theta));

    const int N = 2 * n;
    const SpaceConfig config(N, 2);
    std::vector<Eigen::MatrixXd> maps;
    for (int i = 0; i < N; ++i) maps.push_back(alpha * rot(i < n ? theta : -theta));

    std::vector<ExpectedCheck> expected;
    for (int i = 1; i <= N; ++i)
        expected.push_back({"check_firmly_nonexpansive", {{"resolvent_of", i}}, Verdict::pass});
    expected.push_back({"check_sum_surjective", {}, Verdict::pass});
    expected.push_back({"check_partition_identity", {}, Verdict::fail});
    expected.push_back({"check_pairwise_c_monotone", {}, Verdict::fail});

    GalleryCase c{"partition_counterexample",
                  GammaSet(config, std::move(maps)),
                  std::nullopt,
                  std::move(expected),
                  default_param_grid(2),
                  {},
                  {{"alpha", alpha}, {"theta", theta}, {"n", n}}};
    return c;
}

std::vector<std::string> list_ids() {
    return {"ex5.1", "cor5.2", "ex5.3", "ex5.4", "ex5.5", "ex5.6", "ex5.7"};
}

GalleryCase make_case(const std::string& id) {
    if (id == "ex5.1") {
        std::vector<Eigen::MatrixXd> Q(3);
        Q[0] = Eigen::MatrixXd::Constant(1, 1, 1.0);
        Q[1] = Eigen::MatrixXd::Constant(1, 1, 1.0);
        Q[2] = Eigen::MatrixXd::Constant(1, 1, 2.0);
        GalleryCase c = make_quadratic_family(Q);
        c.id = id;
        return c;
    }
    if (id == "cor5.2") {
        std::vector<Eigen::MatrixXd> Q(3, Eigen::MatrixXd::Identity(1, 1));
        GalleryCase c = make_quadratic_family(Q);
        c.id = id;
        c.expected.push_back({"check_splitting_inequality", {}, Verdict::pass});
        c.grids.assign(3, Grid::uniform(1, -3.0, 3.0, 61));
        return c;
    }
    if (id == "ex5.3") {
        const std::vector<MonotoneTable> alphas{
            tabulate([](double t) { return t; }, -3.0, 3.0, 301),
            tabulate([](double t) { return 2.0 * t; }, -3.0, 3.0, 301)};
        GalleryCase c = make_curve_family(alphas, {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5});
        c.id = id;
        return c;
    }
    if (id == "ex5.4") {
        GalleryCase c = make_example_54();
        c.id = id;
        return c;
    }
    if (id == "ex5.5") {
        std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> graph;
        const Eigen::Matrix2d R = rot(std::numbers::pi / 2);
        for (int a = -1; a <= 1; ++a) {
            for (int b = -1; b <= 1; ++b) {
                Eigen::VectorXd x(2);
                x << a, b;
                graph.emplace_back(x, R * x);
            }
        }
        GalleryCase c = make_trivial_embedding(graph, 4);
        c.id = id;
        c.expected.push_back({"check_n_c_cyclic", {{"n", 3}}, Verdict::fail});
        return c;
    }
    if (id == "ex5.6") {
        GalleryCase c = make_rotation_tripod();
        c.id = id;
        return c;
    }
    if (id == "ex5.7") {
        GalleryCase c = make_partition_counterexample(2, std::numbers::pi / 3);
        c.id = id;
        return c;
    }
    throw ConfigError("unknown gallery id: " + id);
}

namespace {

CheckReport dispatch(const GalleryCase& c, const ExpectedCheck& e) {
    const nlohmann::json p = e.params.is_null() ? nlohmann::json::object() : e.params;
    const double tol = p.value("tol", kDefaultTol);
    const auto require_tuple = [&]() -> const SplittingTuple& {
        if (!c.tuple) throw ConfigError("gallery case has no tuple for " + e.op);
        return *c.tuple;
    };
    if (e.op == "check_pairwise_c_monotone")
        return check_pairwise_c_monotone(c.gamma, c.sample_grid, tol);
    if (e.op == "check_n_c_cyclic")
        return check_n_c_cyclic(c.gamma, p.at("n").get<int>(), c.sample_grid, tol,
                                p.value("budget", kDefaultCyclicBudget),
                                p.value("seed", kDefaultSeed));
    if (e.op == "classify_maximality") return classify_maximality(c.gamma, c.sample_grid, tol);
    if (e.op == "check_partition_identity")
        return check_partition_identity(c.gamma, c.sample_grid, tol);
    if (e.op == "check_sum_surjective") return check_sum_surjective(c.gamma, {}, tol);
    if (e.op == "check_two_marginal_projections")
        return check_two_marginal_projections(c.gamma, c.sample_grid, tol);
    if (e.op == "check_firmly_nonexpansive")
        return check_firmly_nonexpansive(
            resolvent_samples(c.gamma, p.at("resolvent_of").get<int>(), c.sample_grid), tol);
    if (e.op == "check_splitting_inequality") {
        const auto pts = materialize(c.gamma, c.sample_grid);
        return check_splitting_inequality(require_tuple(), c.grids.empty() ? nullptr : &c.grids,
                                          &pts, tol);
    }
    if (e.op == "check_prox_partition")
        return check_prox_partition(require_tuple(), default_probes(c.gamma.config().d), tol);
    if (e.op == "check_envelope_criterion")
        return check_envelope_criterion(require_tuple(), default_probes(c.gamma.config().d),
                                        &c.gamma, c.sample_grid, tol);
    if (e.op == "check_subdiff_identity")
        return check_subdiff_identity(require_tuple(), c.gamma, c.sample_grid, tol);
    throw ConfigError("unknown gallery check: " + e.op);
}

}  // namespace

nlohmann::json CaseRunResult::to_json() const {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& o : checks)
        jc.push_back({{"op", o.op},
                      {"params", o.params},
                      {"expected", to_string(o.expected)},
                      {"actual", to_string(o.actual)},
                      {"matched", o.matched},
                      {"report", o.report.to_json()}});
    return nlohmann::json{
        {"id", id}, {"all_matched", all_matched}, {"instance", instance}, {"checks", jc}};
}

CaseRunResult run_case(const GalleryCase& c) {
    CaseRunResult result;
    result.id = c.id;
    result.all_matched = true;
    result.instance["gamma"] = to_json(c.gamma);
    if (c.tuple) result.instance["tuple"] = to_json(*c.tuple);
    for (const auto& e : c.expected) {
        CheckOutcome outcome{e.op, e.params, e.expected, Verdict::inconclusive, {}, false};
        try {
            outcome.report = dispatch(c, e);
        } catch (const WellDefinednessError& err) {
            outcome.report = err.report;
        }
        outcome.actual = outcome.report.verdict;
        outcome.matched = outcome.actual == e.expected;
        result.all_matched &= outcome.matched;
        result.checks.push_back(std::move(outcome));
    }
    return result;
}

}  // namespace mm::gallery
