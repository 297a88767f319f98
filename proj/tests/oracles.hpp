#pragma once

// Independent reference computations used only by the test suites. These stay
// deliberately naive (full enumeration, closed forms, dense scans) so they can
// cross-check the production paths without sharing code with them.

#include "mm/convex.hpp"
#include "mm/core.hpp"
#include "mm/monotone.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// Cyclic monotonicity of order n by enumerating tuples AND all N permutations
// (no sigma_1 = identity reduction). Returns the smallest slack.
inline double cyclic_min_slack_full(const std::vector<mm::MultiPoint>& pts, int n) {
    const int N = pts[0].config().N;
    const std::size_t m = pts.size();

    std::vector<std::vector<int>> perms;
    {
        std::vector<int> p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }

    const auto assembled_cost = [&](const std::vector<int>& choice) {
        double total = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                total += pts[static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])]
                             .coords().col(i)
                             .dot(pts[static_cast<std::size_t>(choice[static_cast<std::size_t>(j)])]
                                      .coords().col(j));
        return total;
    };

    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<int> tuple(static_cast<std::size_t>(n), 0);
    std::vector<std::size_t> pidx(static_cast<std::size_t>(N), 0);
    std::vector<int> choice(static_cast<std::size_t>(N));
    while (true) {
        std::fill(pidx.begin(), pidx.end(), 0);
        while (true) {
            double lhs = 0.0, rhs = 0.0;
            for (int j = 0; j < n; ++j) {
                std::vector<int> plain(static_cast<std::size_t>(N));
                for (int i = 0; i < N; ++i) {
                    choice[static_cast<std::size_t>(i)] =
                        tuple[static_cast<std::size_t>(perms[pidx[static_cast<std::size_t>(i)]]
                                                           [static_cast<std::size_t>(j)])];
                    plain[static_cast<std::size_t>(i)] = tuple[static_cast<std::size_t>(j)];
                }
                lhs += assembled_cost(choice);
                rhs += assembled_cost(plain);
            }
            min_slack = std::min(min_slack, rhs - lhs);
            std::size_t k = pidx.size();
            while (k > 0 && ++pidx[k - 1] == perms.size()) pidx[--k] = 0;
            if (k == 0) break;
        }
        std::size_t k = tuple.size();
        while (k > 0 && ++tuple[k - 1] == static_cast<int>(m)) tuple[--k] = 0;
        if (k == 0) break;
    }
    return min_slack;
}

// Discrete Legendre transform by direct scan: out[j] = max_i us[j]*xs[i] - vals[i].
inline std::vector<double> legendre_brute_1d(const std::vector<double>& xs,
                                             const std::vector<double>& vals,
                                             const std::vector<double>& us) {
    std::vector<double> out(us.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < us.size(); ++j)
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(vals[i])) continue;
            out[j] = std::max(out[j], us[j] * xs[i] - vals[i]);
        }
    return out;
}

// e_{f*}(s) = (f + q)*(s), closed form for q_M with M PSD.
inline double conjugate_envelope_quadratic(const Eigen::MatrixXd& M, const Eigen::VectorXd& s) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M.rows(), M.cols()) + M;
    return 0.5 * s.dot(A.ldlt().solve(s));
}

// e_{f*}(s) for f = indicator of range(B) plus q_M.
inline double conjugate_envelope_subspace(const Eigen::MatrixXd& B, const Eigen::MatrixXd& M,
                                          const Eigen::VectorXd& s) {
    if (B.cols() == 0) return 0.0;
    const Eigen::MatrixXd A =
        B.transpose() * (Eigen::MatrixXd::Identity(M.rows(), M.cols()) + M) * B;
    const Eigen::VectorXd bs = B.transpose() * s;
    return 0.5 * bs.dot(A.ldlt().solve(bs));
}

// e_{f*}(s) = sup_x s x - f(x) - q(x) for a 1-D function, by ternary search on
// the concave objective over [lo, hi].
template <typename F>
double conjugate_envelope_1d(const F& f, double s, double lo, double hi) {
    const auto phi = [&](double x) { return s * x - f(x) - 0.5 * x * x; };
    for (int iter = 0; iter < 200; ++iter) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (phi(m1) < phi(m2))
            lo = m1;
        else
            hi = m2;
    }
    return phi(0.5 * (lo + hi));
}

// Deterministic helpers for random instances.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int d, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::VectorXd v(d);
    for (int k = 0; k < d; ++k) v[k] = uniform(rng, lo, hi);
    return v;
}

inline mm::MultiPoint random_point(std::mt19937_64& rng, const mm::SpaceConfig& config,
                                   double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd c(config.d, config.N);
    for (int i = 0; i < config.N; ++i) c.col(i) = random_vector(rng, config.d, lo, hi);
    return mm::MultiPoint(config, c);
}

inline mm::GammaSet random_finite_gamma(std::mt19937_64& rng, int N, int d, int max_points) {
    const mm::SpaceConfig config(N, d);
    const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_points));
    std::vector<mm::MultiPoint> pts;
    for (int k = 0; k < m; ++k) pts.push_back(random_point(rng, config));
    return mm::GammaSet(config, std::move(pts));
}

// Random orthogonal matrix via QR of a random matrix.
inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int d) {
    Eigen::MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = uniform(rng, -1.0, 1.0);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    return qr.householderQ();
}

// Commuting symmetric positive definite family sharing one eigenbasis.
inline std::vector<Eigen::MatrixXd> random_commuting_family(std::mt19937_64& rng, int N, int d) {
    const Eigen::MatrixXd U = random_orthogonal(rng, d);
    std::vector<Eigen::MatrixXd> Q;
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd diag(d);
        for (int k = 0; k < d; ++k) diag[k] = uniform(rng, 0.3, 3.0);
        Eigen::MatrixXd Qi = U * diag.asDiagonal() * U.transpose();
        Q.push_back(0.5 * (Qi + Qi.transpose()));
    }
    return Q;
}

}  // namespace oracle
