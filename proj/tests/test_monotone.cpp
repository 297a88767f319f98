#include "doctest.h"

#include "mm/json_io.hpp"
#include "mm/monotone.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace mm;

namespace {

Eigen::Matrix2d rot(double theta) {
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R;
}

MultiPoint scalar_point(const SpaceConfig& config, std::initializer_list<double> entries) {
    Eigen::MatrixXd c(1, config.N);
    int i = 0;
    for (double v : entries) c(0, i++) = v;
    return MultiPoint(config, c);
}

GammaSet tripod() {
    const Eigen::Matrix2d T = 0.5 * std::sqrt(3.0) * rot(-std::numbers::pi / 2);
    return GammaSet(SpaceConfig(3, 2),
                    std::vector<Eigen::MatrixXd>{Eigen::Matrix2d::Identity(), T, T});
}

GammaSet counterexample_57() {
    const double alpha = 0.5;  // 1 / (2n cos theta) with n = 2, theta = pi/3
    std::vector<Eigen::MatrixXd> maps;
    for (int i = 0; i < 2; ++i) maps.push_back(alpha * rot(std::numbers::pi / 3));
    for (int i = 0; i < 2; ++i) maps.push_back(alpha * rot(-std::numbers::pi / 3));
    return GammaSet(SpaceConfig(4, 2), std::move(maps));
}

GraphPairs map_samples(const Eigen::Matrix2d& T, const std::vector<Eigen::Vector2d>& xs) {
    GraphPairs g;
    for (const auto& x : xs) g.pairs.emplace_back(x, T * x);
    return g;
}

}  // namespace

TEST_CASE("A_K graph extraction") {
    const SpaceConfig c31(3, 1);
    const GammaSet gamma(c31, std::vector<MultiPoint>{scalar_point(c31, {1, 2, 3})});
    const GraphPairs g = extract_AK_graph(gamma, IndexSubset({1}, 3));
    REQUIRE(g.pairs.size() == 1);
    CHECK(g.pairs[0].first[0] == 1.0);
    CHECK(g.pairs[0].second[0] == 5.0);

    // tripod at parameter (1,0): (sum over {1}, sum over {2,3}) = ((1,0),(0,-sqrt3))
    const auto pts = materialize(tripod(), Grid::uniform(2, -2, 2, 5));
    const SpaceConfig c32(3, 2);
    GammaSet single(c32, std::vector<MultiPoint>{
                             MultiPoint(c32, std::vector<Eigen::VectorXd>{
                                                 Eigen::Vector2d(1, 0),
                                                 Eigen::Vector2d(0, -0.5 * std::sqrt(3.0)),
                                                 Eigen::Vector2d(0, -0.5 * std::sqrt(3.0))})});
    const GraphPairs g2 = extract_AK_graph(single, IndexSubset({1}, 3));
    CHECK(g2.pairs[0].first.isApprox(Eigen::Vector2d(1, 0)));
    CHECK(g2.pairs[0].second.isApprox(Eigen::Vector2d(0, -std::sqrt(3.0)), 1e-12));

    const SpaceConfig c21(2, 1);
    const GammaSet diag(c21, std::vector<MultiPoint>{scalar_point(c21, {2, 2})});
    const GraphPairs g3 = extract_AK_graph(diag, IndexSubset({1}, 2));
    CHECK(g3.pairs[0].first[0] == 2.0);
    CHECK(g3.pairs[0].second[0] == 2.0);
}

TEST_CASE("graph monotonicity check") {
    GraphPairs identity;
    identity.pairs = {{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)},
                      {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)}};
    const CheckReport ok = check_graph_monotone(identity);
    CHECK(ok.passed());
    CHECK(ok.margin == doctest::Approx(1.0));

    GraphPairs bad;
    bad.pairs = {{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)},
                 {Eigen::VectorXd::Ones(1), -Eigen::VectorXd::Ones(1)}};
    const CheckReport fail = check_graph_monotone(bad);
    CHECK(fail.failed());
    CHECK(fail.witness["inner_product"].get<double>() == doctest::Approx(-1.0));

    // rotation by -2pi/3 sampled at (1,0) and (0,0): inner product cos(2pi/3)
    const CheckReport rotfail = check_graph_monotone(
        map_samples(rot(-2.0 * std::numbers::pi / 3),
                    {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0)}));
    CHECK(rotfail.failed());
    CHECK(rotfail.margin == doctest::Approx(-0.5));
}

TEST_CASE("pairwise c-monotonicity") {
    const SpaceConfig c31(3, 1);
    std::vector<MultiPoint> diag;
    for (double v : {-1.0, 0.0, 0.5, 2.0}) diag.push_back(scalar_point(c31, {v, v, v}));
    CHECK(check_pairwise_c_monotone(GammaSet(c31, diag)).passed());

    CHECK(check_pairwise_c_monotone(tripod(), Grid::uniform(2, -2, 2, 5)).passed());

    const CheckReport fail =
        check_pairwise_c_monotone(counterexample_57(), Grid::uniform(2, -2, 2, 5));
    CHECK(fail.failed());
    CHECK(fail.witness["K"] == nlohmann::json({1, 2}));

    // single point is trivially monotone
    const GammaSet one(c31, std::vector<MultiPoint>{scalar_point(c31, {1, 2, 3})});
    CHECK(check_pairwise_c_monotone(one).passed());
}

TEST_CASE("cyclic monotonicity input validation") {
    const SpaceConfig c21(2, 1);
    const GammaSet one(c21, std::vector<MultiPoint>{scalar_point(c21, {1, 1})});
    CHECK_THROWS_AS(check_n_c_cyclic(one, 1), ConfigError);
    CHECK_THROWS_AS(check_n_c_cyclic(one, 2, std::nullopt, kDefaultTol, 0), ConfigError);
}

TEST_CASE("single point passes every cyclic order") {
    const SpaceConfig c32(3, 2);
    const GammaSet one(c32, std::vector<MultiPoint>{
                                MultiPoint(c32, Eigen::MatrixXd::Random(2, 3))});
    for (int n : {2, 3, 4}) {
        const CheckReport r = check_n_c_cyclic(one, n);
        CHECK(r.passed());
        CHECK(r.margin == doctest::Approx(0.0));
        CHECK(r.mode == "exhaustive");
    }
}

TEST_CASE("tripod fails the 3-cycle test") {
    const GammaSet gamma = tripod();
    const Grid sample = Grid::uniform(2, -2, 2, 5);

    const CheckReport exhaustive = check_n_c_cyclic(gamma, 3, sample);
    CHECK(exhaustive.failed());
    CHECK(exhaustive.mode == "exhaustive");

    const CheckReport randomized = check_n_c_cyclic(gamma, 3, sample, kDefaultTol, 10'000, 2019);
    CHECK(randomized.failed());
    CHECK(randomized.mode == "randomized");
    CHECK(randomized.witness.contains("trial"));

    // order 2 matches the pairwise check
    CHECK(check_n_c_cyclic(gamma, 2, sample).passed());
}

TEST_CASE("order-2 cyclic check agrees with the pairwise check") {
    std::mt19937_64 rng(11);
    int fails = 0, passes = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const int N = 3 + static_cast<int>(rng() % 2);
        const int d = 1 + static_cast<int>(rng() % 2);
        GammaSet gamma = oracle::random_finite_gamma(rng, N, d, 5);
        if (trial % 3 == 0) {
            // monotone instance: diagonal plus a constant shift
            const SpaceConfig config(N, d);
            std::vector<MultiPoint> pts;
            for (int k = 0; k < 4; ++k) {
                const Eigen::VectorXd v = oracle::random_vector(rng, d);
                Eigen::MatrixXd c(d, N);
                for (int i = 0; i < N; ++i) c.col(i) = v;
                pts.emplace_back(config, c);
            }
            gamma = GammaSet(config, std::move(pts));
        }
        const CheckReport cyc = check_n_c_cyclic(gamma, 2);
        const CheckReport pw = check_pairwise_c_monotone(gamma);
        CHECK(cyc.verdict == pw.verdict);
        fails += pw.failed();
        passes += pw.passed();
    }
    CHECK(fails > 0);
    CHECK(passes > 0);
}

TEST_CASE("identity-permutation reduction matches full enumeration") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const GammaSet gamma = oracle::random_finite_gamma(rng, 3, 2, 3);
        const CheckReport reduced = check_n_c_cyclic(gamma, n);
        REQUIRE(reduced.mode == "exhaustive");
        const double full = oracle::cyclic_min_slack_full(gamma.points(), n);
        if (reduced.passed()) {
            CHECK(full >= -kDefaultTol);
            CHECK(std::abs(full - reduced.margin) <= 1e-12);
        } else {
            CHECK(full < -kDefaultTol);
        }
    }
}

TEST_CASE("cyclic verdicts are shift invariant") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 3;
        const int d = 1 + static_cast<int>(rng() % 2);
        const GammaSet gamma = oracle::random_finite_gamma(rng, N, d, 4);
        const MultiPoint shift = oracle::random_point(rng, gamma.config(), -2.0, 2.0);
        const GammaSet shifted = shift_gamma(gamma, shift);
        for (int n : {2, 3})
            CHECK(check_n_c_cyclic(gamma, n).verdict == check_n_c_cyclic(shifted, n).verdict);
    }
}

TEST_CASE("firm nonexpansiveness check") {
    const std::vector<Eigen::Vector2d> xs{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0),
                                          Eigen::Vector2d(-1, 1)};
    CHECK(check_firmly_nonexpansive(map_samples(Eigen::Matrix2d::Identity(), xs)).passed());
    CHECK(check_firmly_nonexpansive(map_samples(0.5 * rot(std::numbers::pi / 3), xs)).passed());

    const CheckReport fail =
        check_firmly_nonexpansive(map_samples(rot(std::numbers::pi / 3), xs));
    CHECK(fail.failed());
}

TEST_CASE("resolvent samples") {
    // tripod: s = (I + sqrt3 R_{-pi/2}) x, block 1 recovers x
    const auto g1 = resolvent_samples(tripod(), 1, Grid::uniform(2, -2, 2, 5));
    const Eigen::Matrix2d J1 = 0.5 * rot(std::numbers::pi / 3);
    for (const auto& [s, x1] : g1.pairs)
        CHECK((J1 * s - x1).cwiseAbs().maxCoeff() <= 1e-12);

    // diagonal: every resolvent is s/N
    const SpaceConfig c31(3, 1);
    std::vector<MultiPoint> diag;
    for (double v : {-1.0, 0.0, 2.0}) diag.push_back(scalar_point(c31, {v, v, v}));
    const auto g2 = resolvent_samples(GammaSet(c31, diag), 2);
    for (const auto& [s, x2] : g2.pairs) CHECK(x2[0] == doctest::Approx(s[0] / 3.0));

    // equal sums with different blocks certify the set is not c-monotone
    const SpaceConfig c21(2, 1);
    const GammaSet clash(c21, std::vector<MultiPoint>{scalar_point(c21, {0, 0}),
                                                      scalar_point(c21, {1, -1})});
    CHECK_THROWS_AS(resolvent_samples(clash, 1), WellDefinednessError);
    try {
        resolvent_samples(clash, 1);
    } catch (const WellDefinednessError& e) {
        CHECK(e.report.failed());
        CHECK_FALSE(e.report.witness.is_null());
    }
}

TEST_CASE("partition identity") {
    CHECK(check_partition_identity(tripod(), Grid::uniform(2, -2, 2, 5)).passed());

    const CheckReport fail =
        check_partition_identity(counterexample_57(), Grid::uniform(2, -2, 2, 5));
    CHECK(fail.failed());
    CHECK(fail.witness["K"] == nlohmann::json({1, 2}));

    const SpaceConfig c31(3, 1);
    std::vector<MultiPoint> diag;
    for (double v : {-1.0, 0.5, 2.0}) diag.push_back(scalar_point(c31, {v, v, v}));
    CHECK(check_partition_identity(GammaSet(c31, diag)).passed());
}

TEST_CASE("resolvent complement identity") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto Q = oracle::random_commuting_family(rng, 3, 2);
        const GammaSet gamma(SpaceConfig(3, 2), Q);
        const auto pts = materialize(gamma, Grid::uniform(2, -1, 1, 3));
        for (const auto& K : proper_subsets_containing_first(3)) {
            for (const auto& p : pts) {
                Eigen::VectorXd partial = Eigen::VectorXd::Zero(2);
                Eigen::VectorXd complement = Eigen::VectorXd::Zero(2);
                for (int i = 1; i <= 3; ++i)
                    (K.contains(i) ? partial : complement) += p.block(i);
                CHECK((partial + complement - sum_map(p)).norm() <=
                      1e-12 * (1.0 + sum_map(p).norm()));
            }
        }
    }
}

TEST_CASE("A_K monotone iff its resolvent is firmly nonexpansive") {
    std::mt19937_64 rng(29);
    int agree_fail = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int N = 3;
        const GammaSet gamma = oracle::random_finite_gamma(rng, N, 2, 4);
        const auto pts = gamma.points();
        for (const auto& K : proper_subsets_containing_first(N)) {
            const CheckReport mono = check_graph_monotone(extract_AK_graph(gamma, K));
            GraphPairs jk;
            for (const auto& p : pts) {
                Eigen::VectorXd partial = Eigen::VectorXd::Zero(2);
                for (int i : K.members()) partial += p.block(i);
                jk.pairs.emplace_back(sum_map(p), partial);
            }
            const CheckReport firm = check_firmly_nonexpansive(jk);
            CHECK(mono.verdict == firm.verdict);
            agree_fail += mono.failed();
        }
    }
    CHECK(agree_fail > 0);
}

TEST_CASE("c-monotone sets have injective block sums") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const auto Q = oracle::random_commuting_family(rng, 3, 2);
        const GammaSet gamma(SpaceConfig(3, 2), Q);
        const Grid sample = Grid::uniform(2, -2, 2, 3);
        REQUIRE(check_pairwise_c_monotone(gamma, sample).passed());
        for (int i = 1; i <= 3; ++i)
            CHECK_NOTHROW(resolvent_samples(gamma, i, sample));
    }
}

TEST_CASE("sum surjectivity") {
    const CheckReport ok = check_sum_surjective(tripod(), {Eigen::Vector2d(1, -std::sqrt(3.0))});
    CHECK(ok.passed());
    CHECK(ok.margin == doctest::Approx(2.0));
    const auto param = ok.details["preimages"][0]["parameter"];
    CHECK(param[0].get<double>() == doctest::Approx(1.0));
    CHECK(param[1].get<double>() == doctest::Approx(0.0).epsilon(1e-9));

    // scalar family (1,1,2): T = 4
    const SpaceConfig c31(3, 1);
    std::vector<Eigen::MatrixXd> maps{Eigen::MatrixXd::Constant(1, 1, 1.0),
                                      Eigen::MatrixXd::Constant(1, 1, 1.0),
                                      Eigen::MatrixXd::Constant(1, 1, 2.0)};
    const CheckReport scalar = check_sum_surjective(GammaSet(c31, maps));
    CHECK(scalar.passed());
    CHECK(scalar.margin == doctest::Approx(4.0));

    // rank-deficient sum
    Eigen::Matrix2d rank1;
    rank1 << 1, 0, 0, 0;
    const GammaSet flat(SpaceConfig(2, 2),
                        std::vector<Eigen::MatrixXd>{rank1, Eigen::Matrix2d::Zero()});
    CHECK(check_sum_surjective(flat).failed());

    const GammaSet finite(c31, std::vector<MultiPoint>{scalar_point(c31, {1, 2, 3})});
    const CheckReport inc = check_sum_surjective(finite, {Eigen::VectorXd::Constant(1, 6.0)});
    CHECK(inc.verdict == Verdict::inconclusive);
    CHECK(inc.details["targets_hit"].get<int>() == 1);
}

TEST_CASE("maximality classification") {
    const CheckReport both = classify_maximality(tripod());
    CHECK(both.passed());
    CHECK(both.details["certified_by"].size() == 2);

    // example with singular T_1: only the sum-surjectivity route applies
    Eigen::Matrix2d T1, T2, T3;
    T1 << 1, 0, 0, 0;
    T2 << 2, -1, 2, -1;
    T3 << 0, 1, 7, -5;
    const GammaSet span(SpaceConfig(3, 2), std::vector<Eigen::MatrixXd>{T1, T2, T3});
    const CheckReport only25 = classify_maximality(span, Grid::uniform(2, -2, 2, 21));
    CHECK(only25.passed());
    CHECK(only25.details["certified_by"] ==
          nlohmann::json::array({"minty_sum_surjectivity"}));
    CHECK(only25.details["continuous_graph"] == "fail");

    const SpaceConfig c31(3, 1);
    const GammaSet finite(c31, std::vector<MultiPoint>{scalar_point(c31, {1, 1, 1})});
    CHECK(classify_maximality(finite).verdict == Verdict::inconclusive);

    const CheckReport bad = classify_maximality(counterexample_57());
    CHECK(bad.failed());
    CHECK_FALSE(bad.witness.is_null());
}

TEST_CASE("two-marginal projection monotonicity") {
    std::mt19937_64 rng(37);
    const auto Q = oracle::random_commuting_family(rng, 3, 2);
    const CheckReport family =
        check_two_marginal_projections(GammaSet(SpaceConfig(3, 2), Q), Grid::uniform(2, -2, 2, 3));
    CHECK(family.passed());
    CHECK(family.details["c_monotone"] == "pass");

    Eigen::Matrix2d T1, T2, T3;
    T1 << 1, 0, 0, 0;
    T2 << 2, -1, 2, -1;
    T3 << 0, 1, 7, -5;
    const GammaSet span(SpaceConfig(3, 2), std::vector<Eigen::MatrixXd>{T1, T2, T3});
    const CheckReport span_report =
        check_two_marginal_projections(span, Grid::uniform(2, -2, 2, 21));
    CHECK(span_report.failed());
    for (const auto& row : span_report.details["pairs"])
        CHECK(row["verdict"] == "fail");
    // yet the set itself is c-monotone
    CHECK(check_pairwise_c_monotone(span, Grid::uniform(2, -2, 2, 21)).passed());

    const SpaceConfig c31(3, 1);
    std::vector<MultiPoint> diag;
    for (double v : {-1.0, 0.0, 1.0}) diag.push_back(scalar_point(c31, {v, v, v}));
    CHECK(check_two_marginal_projections(GammaSet(c31, diag)).passed());
}

TEST_CASE("report serialization") {
    const CheckReport fail =
        check_pairwise_c_monotone(counterexample_57(), Grid::uniform(2, -2, 2, 5));
    const auto j = fail.to_json();
    CHECK(j["verdict"] == "fail");
    CHECK(j["margin"].get<double>() < 0.0);
    CHECK(j.contains("witness"));

    const CheckReport r = check_n_c_cyclic(tripod(), 3, Grid::uniform(2, -2, 2, 5),
                                           kDefaultTol, 10'000, 77);
    const auto jr = r.to_json();
    CHECK(jr["mode"] == "randomized");
    CHECK(jr["seed"].get<std::uint64_t>() == 77);
}
