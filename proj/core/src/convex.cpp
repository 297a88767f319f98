#include "mm/convex.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json vec_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

nlohmann::json blocks_json(const Eigen::MatrixXd& coords) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < coords.cols(); ++i)
        a.push_back(vec_json(coords.col(i)));
    return a;
}

void require_psd(const Eigen::MatrixXd& M, const char* what) {
    if (M.rows() != M.cols()) throw ConfigError(std::string(what) + ": matrix must be square");
    const double scale = 1.0 + M.cwiseAbs().maxCoeff();
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ConfigError(std::string(what) + ": matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
        throw ConfigError(std::string(what) + ": matrix must be positive semidefinite");
}

// Composite adaptive Simpson quadrature, halving until the panel agrees with
// its split to ~1e-10.
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) < eps) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double eps = 1e-10) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, eps, 40);
}

// Parameter interval shared by every table of a curve tuple, and the induced
// domain of the antiderivative that owns index `own`.
struct CurveOps {
    const CurveAntiderivative* c;
    double t_lo, t_hi;
    double x_lo, x_hi;

    explicit CurveOps(const CurveAntiderivative& curve) : c(&curve) {
        t_lo = -kInf;
        t_hi = kInf;
        for (const auto& a : curve.alphas) {
            t_lo = std::max(t_lo, a.t_min());
            t_hi = std::min(t_hi, a.t_max());
        }
        if (!(t_lo <= 0.0 && 0.0 <= t_hi))
            throw ConfigError("CurveAntiderivative: shared parameter range must contain 0");
        const auto& own = curve.alphas[static_cast<std::size_t>(curve.own_index - 1)];
        x_lo = own(t_lo);
        x_hi = own(t_hi);
    }

    double derivative(double x) const {
        const auto& own = c->alphas[static_cast<std::size_t>(c->own_index - 1)];
        double t = own.inverse(x);
        t = std::clamp(t, t_lo, t_hi);
        double g = 0.0;
        for (std::size_t k = 0; k < c->alphas.size(); ++k)
            if (static_cast<int>(k) + 1 != c->own_index) g += c->alphas[k](t);
        return g;
    }

    // +infinity beyond the tabulated domain
    double value(double x) const {
        if (x < x_lo || x > x_hi) return kInf;
        return adaptive_simpson([this](double t) { return derivative(t); }, 0.0, x);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// MonotoneTable
// ---------------------------------------------------------------------------

MonotoneTable::MonotoneTable(std::vector<double> ts, std::vector<double> vals)
    : ts_(std::move(ts)), vals_(std::move(vals)) {
    if (ts_.size() != vals_.size() || ts_.size() < 2)
        throw ConfigError("MonotoneTable: need matching ts/vals with at least 2 samples");
    double scale = 0.0;
    for (std::size_t k = 0; k < ts_.size(); ++k) {
        if (!std::isfinite(ts_[k]) || !std::isfinite(vals_[k]))
            throw ConfigError("MonotoneTable: entries must be finite");
        if (k > 0 && !(ts_[k] > ts_[k - 1] && vals_[k] > vals_[k - 1]))
            throw ConfigError("MonotoneTable: table must be strictly increasing");
        scale = std::max(scale, std::abs(vals_[k]));
    }
    if (ts_.front() > 0.0 || ts_.back() < 0.0)
        throw ConfigError("MonotoneTable: parameter range must contain 0");
    if (std::abs((*this)(0.0)) > 1e-12 * (1.0 + scale))
        throw ConfigError("MonotoneTable: alpha(0) must be 0");
}

double MonotoneTable::operator()(double t) const {
    if (t < ts_.front() || t > ts_.back())
        throw DomainError("MonotoneTable: argument outside tabulated range");
    const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - ts_.begin());
    if (hi == 0) return vals_.front();
    if (hi == ts_.size()) return vals_.back();
    const std::size_t lo = hi - 1;
    const double w = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
    return vals_[lo] + w * (vals_[hi] - vals_[lo]);
}

double MonotoneTable::inverse(double v) const {
    if (v < vals_.front() || v > vals_.back())
        throw DomainError("MonotoneTable: value outside tabulated range");
    double lo = ts_.front(), hi = ts_.back();
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        ((*this)(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// ConvexFn
// ---------------------------------------------------------------------------

ConvexFn::ConvexFn(Quadratic q) : body_(std::move(q)), dim_(0) {
    const auto& Q = std::get<Quadratic>(body_);
    require_psd(Q.M, "Quadratic");
    dim_ = static_cast<int>(Q.M.rows());
}

ConvexFn::ConvexFn(SubspaceQuadratic q) : body_(std::move(q)), dim_(0) {
    const auto& S = std::get<SubspaceQuadratic>(body_);
    dim_ = static_cast<int>(S.B.rows());
    if (dim_ < 1) throw ConfigError("SubspaceQuadratic: basis must have d rows");
    if (S.B.cols() > S.B.rows())
        throw ConfigError("SubspaceQuadratic: more basis columns than dimensions");
    if (S.B.cols() > 0) {
        const Eigen::MatrixXd gram = S.B.transpose() * S.B;
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(S.B.cols(), S.B.cols());
        if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10)
            throw ConfigError("SubspaceQuadratic: basis columns must be orthonormal");
    }
    if (S.M.rows() != dim_ || S.M.cols() != dim_)
        throw ConfigError("SubspaceQuadratic: quadratic part must be d x d");
    require_psd(S.M, "SubspaceQuadratic");
}

ConvexFn::ConvexFn(GridFn g) : body_(std::move(g)), dim_(0) {
    const auto& G = std::get<GridFn>(body_);
    dim_ = G.grid.dim();
    if (G.values.size() != G.grid.node_count())
        throw ConfigError("GridFn: one value per grid node required");
    bool any_finite = false;
    for (double v : G.values) {
        if (std::isnan(v) || v == -kInf)
            throw ConfigError("GridFn: values must be finite or +infinity");
        any_finite |= std::isfinite(v);
    }
    if (!any_finite) throw ConfigError("GridFn: function must be finite somewhere");
}

ConvexFn::ConvexFn(CurveAntiderivative c) : body_(std::move(c)), dim_(1) {
    const auto& C = std::get<CurveAntiderivative>(body_);
    if (C.alphas.size() < 2)
        throw ConfigError("CurveAntiderivative: need at least two component maps");
    if (C.own_index < 1 || C.own_index > static_cast<int>(C.alphas.size()))
        throw ConfigError("CurveAntiderivative: own_index out of range");
    CurveOps ops(C);  // validates the shared parameter range
    if (!(ops.t_lo < ops.t_hi))
        throw ConfigError("CurveAntiderivative: tables share no parameter range");
}

ConvexFn::Kind ConvexFn::kind() const {
    return static_cast<Kind>(body_.index());
}

const Quadratic& ConvexFn::quadratic() const { return std::get<Quadratic>(body_); }
const SubspaceQuadratic& ConvexFn::subspace_quadratic() const {
    return std::get<SubspaceQuadratic>(body_);
}
const GridFn& ConvexFn::grid_fn() const { return std::get<GridFn>(body_); }
const CurveAntiderivative& ConvexFn::curve() const {
    return std::get<CurveAntiderivative>(body_);
}

double ConvexFn::value(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw ConfigError("ConvexFn::value: wrong dimension");
    switch (kind()) {
        case Kind::quadratic:
            return 0.5 * x.dot(quadratic().M * x);
        case Kind::subspace_quadratic: {
            const auto& S = subspace_quadratic();
            const Eigen::VectorXd residual =
                S.B.cols() == 0 ? x : Eigen::VectorXd(x - S.B * (S.B.transpose() * x));
            if (residual.norm() > 1e-9 * (1.0 + x.norm())) return kInf;
            return 0.5 * x.dot(S.M * x);
        }
        case Kind::grid: {
            const auto& G = grid_fn();
            const auto flat = G.grid.locate(x);
            if (!flat) throw DomainError("GridFn: evaluated off its lattice");
            return G.values[*flat];
        }
        case Kind::curve:
            return CurveOps(curve()).value(x[0]);
    }
    throw Error("unreachable");
}

Eigen::VectorXd ConvexFn::gradient(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw ConfigError("ConvexFn::gradient: wrong dimension");
    switch (kind()) {
        case Kind::quadratic:
            return quadratic().M * x;
        case Kind::curve: {
            CurveOps ops(curve());
            if (x[0] < ops.x_lo || x[0] > ops.x_hi)
                throw DomainError("CurveAntiderivative: gradient outside tabulated domain");
            Eigen::VectorXd g(1);
            g[0] = ops.derivative(x[0]);
            return g;
        }
        default:
            throw UnsupportedError("ConvexFn::gradient: function is not smooth");
    }
}

bool ConvexFn::is_smooth() const {
    return kind() == Kind::quadratic || kind() == Kind::curve;
}

ConvexFn make_quadratic(Eigen::MatrixXd M) { return ConvexFn(Quadratic{std::move(M)}); }
ConvexFn make_subspace_quadratic(Eigen::MatrixXd B, Eigen::MatrixXd M) {
    return ConvexFn(SubspaceQuadratic{std::move(B), std::move(M)});
}
ConvexFn make_grid_fn(Grid grid, std::vector<double> values) {
    return ConvexFn(GridFn{std::move(grid), std::move(values)});
}
ConvexFn make_curve_antiderivative(std::vector<MonotoneTable> alphas, int own_index) {
    return ConvexFn(CurveAntiderivative{std::move(alphas), own_index});
}

SplittingTuple::SplittingTuple(SpaceConfig config_, std::vector<ConvexFn> funcs_)
    : config(config_), funcs(std::move(funcs_)) {
    if (static_cast<int>(funcs.size()) != config.N)
        throw ConfigError("SplittingTuple: expected one function per marginal");
    for (const auto& f : funcs)
        if (f.dim() != config.d)
            throw ConfigError("SplittingTuple: function dimension mismatch");
}

// ---------------------------------------------------------------------------
// Prox and envelope
// ---------------------------------------------------------------------------

Eigen::VectorXd prox(const ConvexFn& f, const Eigen::VectorXd& s) {
    if (s.size() != f.dim()) throw ConfigError("prox: wrong dimension");
    switch (f.kind()) {
        case ConvexFn::Kind::quadratic: {
            const auto& M = f.quadratic().M;
            const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M.rows(), M.cols()) + M;
            return A.ldlt().solve(s);
        }
        case ConvexFn::Kind::subspace_quadratic: {
            const auto& S = f.subspace_quadratic();
            if (S.B.cols() == 0) return Eigen::VectorXd::Zero(f.dim());
            const Eigen::MatrixXd A =
                S.B.transpose() *
                (Eigen::MatrixXd::Identity(f.dim(), f.dim()) + S.M) * S.B;
            const Eigen::VectorXd w = A.ldlt().solve(S.B.transpose() * s);
            return S.B * w;
        }
        case ConvexFn::Kind::grid: {
            const auto& G = f.grid_fn();
            double best = kInf;
            std::size_t best_idx = 0;
            bool found = false;
            for (std::size_t k = 0; k < G.values.size(); ++k) {
                if (!std::isfinite(G.values[k])) continue;
                const double obj = G.values[k] + 0.5 * (s - G.grid.node(k)).squaredNorm();
                if (!found || obj < best) {  // first node wins ties
                    best = obj;
                    best_idx = k;
                    found = true;
                }
            }
            if (!found) throw DomainError("prox: grid function has no finite value");
            return G.grid.node(best_idx);
        }
        case ConvexFn::Kind::curve: {
            CurveOps ops(f.curve());
            const double target = s[0];
            const auto h = [&](double x) { return x + ops.derivative(x) - target; };
            double lo = ops.x_lo, hi = ops.x_hi;
            if (h(lo) > 0.0 || h(hi) < 0.0)
                throw DomainError("prox: bisection bracket failure on the tabulated domain");
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                (h(mid) < 0.0 ? lo : hi) = mid;
            }
            Eigen::VectorXd out(1);
            out[0] = 0.5 * (lo + hi);
            return out;
        }
    }
    throw Error("unreachable");
}

double moreau_envelope(const ConvexFn& f, const Eigen::VectorXd& s) {
    const Eigen::VectorXd p = prox(f, s);
    return f.value(p) + 0.5 * (s - p).squaredNorm();
}

// ---------------------------------------------------------------------------
// Legendre transforms
// ---------------------------------------------------------------------------

std::vector<double> legendre_transform_1d(const std::vector<double>& xs,
                                          const std::vector<double>& vals,
                                          const std::vector<double>& us,
                                          std::vector<int>* argmax) {
    if (xs.size() != vals.size() || xs.empty())
        throw ConfigError("legendre_transform_1d: xs/vals must match and be nonempty");
    for (std::size_t k = 1; k < xs.size(); ++k)
        if (!(xs[k] > xs[k - 1]))
            throw ConfigError("legendre_transform_1d: xs must be strictly increasing");
    for (std::size_t k = 1; k < us.size(); ++k)
        if (!(us[k] >= us[k - 1]))
            throw ConfigError("legendre_transform_1d: us must be sorted ascending");

    // lower convex hull of the finite samples; the sup is attained on it
    std::vector<int> hull;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!std::isfinite(vals[k])) continue;
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull.back();
            const double lhs = (vals[static_cast<std::size_t>(b)] - vals[static_cast<std::size_t>(a)]) *
                               (xs[k] - xs[static_cast<std::size_t>(b)]);
            const double rhs = (vals[k] - vals[static_cast<std::size_t>(b)]) *
                               (xs[static_cast<std::size_t>(b)] - xs[static_cast<std::size_t>(a)]);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(static_cast<int>(k));
    }
    if (hull.empty()) throw DomainError("legendre_transform_1d: no finite samples");

    std::vector<double> out(us.size());
    if (argmax) argmax->assign(us.size(), hull.front());
    std::size_t k = 0;
    for (std::size_t j = 0; j < us.size(); ++j) {
        const auto score = [&](std::size_t h) {
            const auto i = static_cast<std::size_t>(hull[h]);
            return us[j] * xs[i] - vals[i];
        };
        while (k + 1 < hull.size() && score(k + 1) >= score(k)) ++k;
        out[j] = score(k);
        if (argmax) (*argmax)[j] = hull[k];
    }
    return out;
}

namespace {

// Evaluation that treats a curve's tabulated boundary as the edge of its
// effective domain; used wherever functions are sampled onto grids.
double sample_value(const ConvexFn& f, const Eigen::VectorXd& x) { return f.value(x); }

bool on_grid_boundary(const Grid& g, std::size_t flat) {
    const auto mi = g.multi_index(flat);
    for (int k = 0; k < g.dim(); ++k)
        if (mi[static_cast<std::size_t>(k)] == 0 ||
            mi[static_cast<std::size_t>(k)] == g.steps()[static_cast<std::size_t>(k)] - 1)
            return true;
    return false;
}

ConjugateResult legendre_on_grids(const Grid& primal, const std::vector<double>& values,
                                  const Grid& dual) {
    ConjugateResult result{make_grid_fn(dual, std::vector<double>(dual.node_count(), 0.0))};
    std::vector<double> out(dual.node_count());
    std::vector<std::size_t> arg(dual.node_count());

    if (primal.dim() == 1) {
        std::vector<double> xs(primal.node_count()), us(dual.node_count());
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = primal.coord(0, static_cast<int>(k));
        for (std::size_t k = 0; k < us.size(); ++k) us[k] = dual.coord(0, static_cast<int>(k));
        std::vector<int> argmax;
        out = legendre_transform_1d(xs, values, us, &argmax);
        for (std::size_t k = 0; k < arg.size(); ++k) arg[k] = static_cast<std::size_t>(argmax[k]);
    } else {
        if (primal.node_count() * dual.node_count() > 10'000'000)
            throw UnsupportedError("fenchel_conjugate: grid pair exceeds the node-count limit");
        std::vector<Eigen::VectorXd> xs(primal.node_count());
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = primal.node(k);
        for (std::size_t j = 0; j < dual.node_count(); ++j) {
            const Eigen::VectorXd u = dual.node(j);
            double best = -kInf;
            std::size_t best_idx = 0;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (!std::isfinite(values[k])) continue;
                const double cand = u.dot(xs[k]) - values[k];
                if (cand > best) {
                    best = cand;
                    best_idx = k;
                }
            }
            if (best == -kInf)
                throw DomainError("fenchel_conjugate: no finite samples");
            out[j] = best;
            arg[j] = best_idx;
        }
    }

    for (std::size_t j = 0; j < dual.node_count(); ++j)
        if (on_grid_boundary(primal, arg[j])) result.boundary_nodes.push_back(j);
    result.boundary_warning = !result.boundary_nodes.empty();
    result.fn = make_grid_fn(dual, std::move(out));
    return result;
}

}  // namespace

ConjugateResult fenchel_conjugate(const ConvexFn& f, const std::optional<Grid>& dual_grid) {
    if (f.kind() == ConvexFn::Kind::quadratic) {
        const auto& M = f.quadratic().M;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
        const double scale = 1.0 + M.cwiseAbs().maxCoeff();
        if (eig.eigenvalues().minCoeff() > 1e-12 * scale) {
            Eigen::MatrixXd inv = M.inverse();
            inv = 0.5 * (inv + inv.transpose());
            return ConjugateResult{make_quadratic(std::move(inv))};
        }
        // singular quadratic: fall through to the sampled transform
    }

    if (f.kind() == ConvexFn::Kind::grid) {
        const auto& G = f.grid_fn();
        const Grid dual = dual_grid.value_or(G.grid);
        if (dual.dim() != f.dim())
            throw ConfigError("fenchel_conjugate: dual grid dimension mismatch");
        return legendre_on_grids(G.grid, G.values, dual);
    }

    if (!dual_grid)
        throw UnsupportedError(
            "fenchel_conjugate: this function has no closed-form conjugate; supply a grid");
    const Grid& dual = *dual_grid;
    if (dual.dim() != f.dim())
        throw ConfigError("fenchel_conjugate: dual grid dimension mismatch");
    std::vector<double> sampled(dual.node_count());
    for (std::size_t k = 0; k < dual.node_count(); ++k)
        sampled[k] = sample_value(f, dual.node(k));
    return legendre_on_grids(dual, sampled, dual);
}

// ---------------------------------------------------------------------------
// Multi-marginal conjugation
// ---------------------------------------------------------------------------

namespace {

struct MarginalSamples {
    std::vector<Eigen::VectorXd> nodes;
    std::vector<double> values;
};

MarginalSamples sample_marginal(const ConvexFn& f, const Grid& grid) {
    MarginalSamples s;
    s.nodes.reserve(grid.node_count());
    s.values.reserve(grid.node_count());
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        s.nodes.push_back(grid.node(k));
        s.values.push_back(sample_value(f, s.nodes.back()));
    }
    return s;
}

void validate_grids(const SplittingTuple& tuple, const std::vector<Grid>& grids) {
    if (static_cast<int>(grids.size()) != tuple.config.N)
        throw ConfigError("expected one grid per marginal");
    for (const auto& g : grids)
        if (g.dim() != tuple.config.d) throw ConfigError("grid dimension must equal d");
}

}  // namespace

ConvexFn c_conjugate(const SplittingTuple& tuple, int i0, const std::vector<Grid>& grids) {
    validate_grids(tuple, grids);
    const int N = tuple.config.N;
    if (i0 < 1 || i0 > N) throw ConfigError("c_conjugate: index out of range");
    const Grid& target = grids[static_cast<std::size_t>(i0 - 1)];
    if (target.node_count() == 0) throw ConfigError("c_conjugate: empty grid");

    std::vector<MarginalSamples> others;
    std::vector<int> other_idx;  // 0-based marginal numbers
    std::size_t combos = 1;
    for (int i = 1; i <= N; ++i) {
        if (i == i0) continue;
        others.push_back(
            sample_marginal(tuple.funcs[static_cast<std::size_t>(i - 1)],
                            grids[static_cast<std::size_t>(i - 1)]));
        other_idx.push_back(i - 1);
        combos *= others.back().nodes.size();
    }
    if (combos * target.node_count() > 10'000'000)
        throw UnsupportedError("c_conjugate: product grid exceeds the node-count limit");

    std::vector<Eigen::VectorXd> targets(target.node_count());
    for (std::size_t k = 0; k < targets.size(); ++k) targets[k] = target.node(k);

    std::vector<double> best(target.node_count(), -kInf);
    std::vector<std::size_t> idx(others.size(), 0);
    while (true) {
        double sum_f = 0.0;
        for (std::size_t k = 0; k < others.size(); ++k) sum_f += others[k].values[idx[k]];
        if (std::isfinite(sum_f)) {
            Eigen::VectorXd w = Eigen::VectorXd::Zero(tuple.config.d);
            double cross = 0.0;
            for (std::size_t a = 0; a < others.size(); ++a) {
                const auto& xa = others[a].nodes[idx[a]];
                w += xa;
                for (std::size_t b = a + 1; b < others.size(); ++b)
                    cross += xa.dot(others[b].nodes[idx[b]]);
            }
            const double base = cross - sum_f;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const double cand = targets[t].dot(w) + base;
                if (cand > best[t]) best[t] = cand;
            }
        }
        std::size_t k = idx.size();
        while (k > 0 && ++idx[k - 1] == others[k - 1].nodes.size()) idx[--k] = 0;
        if (k == 0) break;
    }
    if (!best.empty() && best[0] == -kInf)
        throw DomainError("c_conjugate: the remaining tuple is nowhere finite on its grids");
    return make_grid_fn(target, std::move(best));
}

RelaxResult relax_to_c_conjugate(const SplittingTuple& tuple, const std::vector<Grid>& grids,
                                 int passes) {
    validate_grids(tuple, grids);
    if (passes < 1) throw ConfigError("relax_to_c_conjugate: passes must be >= 1");
    const CheckReport pre = check_splitting_inequality(tuple, &grids, nullptr);
    if (!pre.passed())
        throw PreconditionError("relax_to_c_conjugate: c <= (+) u_i fails on the grid", pre);

    const int N = tuple.config.N;
    std::vector<ConvexFn> current = tuple.funcs;
    double last_change = 0.0;
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<std::vector<double>> before(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            const Grid& g = grids[static_cast<std::size_t>(i)];
            auto& snap = before[static_cast<std::size_t>(i)];
            snap.reserve(g.node_count());
            for (std::size_t k = 0; k < g.node_count(); ++k)
                snap.push_back(sample_value(current[static_cast<std::size_t>(i)], g.node(k)));
        }
        for (int i0 = 1; i0 <= N; ++i0) {
            SplittingTuple working(tuple.config, current);
            current[static_cast<std::size_t>(i0 - 1)] = c_conjugate(working, i0, grids);
        }
        last_change = 0.0;
        for (int i = 0; i < N; ++i) {
            const auto& now = current[static_cast<std::size_t>(i)].grid_fn().values;
            const auto& snap = before[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < now.size(); ++k) {
                const bool fin_now = std::isfinite(now[k]);
                const bool fin_before = std::isfinite(snap[k]);
                if (fin_now && fin_before)
                    last_change = std::max(last_change, std::abs(now[k] - snap[k]));
                else if (fin_now != fin_before)
                    last_change = kInf;
            }
        }
    }
    return RelaxResult{SplittingTuple(tuple.config, std::move(current)), last_change};
}

// ---------------------------------------------------------------------------
// Splitting checks
// ---------------------------------------------------------------------------

namespace {

// Visits every product-grid node with its blocks, function sum and cost.
template <typename F>
void sweep_product(const SplittingTuple& tuple, const std::vector<Grid>& grids, F&& visit) {
    validate_grids(tuple, grids);
    const int N = tuple.config.N;
    std::vector<MarginalSamples> per(static_cast<std::size_t>(N));
    std::size_t total = 1;
    for (int i = 0; i < N; ++i) {
        per[static_cast<std::size_t>(i)] =
            sample_marginal(tuple.funcs[static_cast<std::size_t>(i)],
                            grids[static_cast<std::size_t>(i)]);
        total *= per[static_cast<std::size_t>(i)].nodes.size();
    }
    if (total > 10'000'000)
        throw UnsupportedError("product grid exceeds the node-count limit");

    std::vector<std::size_t> idx(static_cast<std::size_t>(N), 0);
    Eigen::MatrixXd blocks(tuple.config.d, N);
    while (true) {
        double sum_f = 0.0;
        for (int i = 0; i < N; ++i) {
            const auto& m = per[static_cast<std::size_t>(i)];
            blocks.col(i) = m.nodes[idx[static_cast<std::size_t>(i)]];
            sum_f += m.values[idx[static_cast<std::size_t>(i)]];
        }
        double cost = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) cost += blocks.col(i).dot(blocks.col(j));
        visit(blocks, sum_f, cost);
        std::size_t k = idx.size();
        while (k > 0 && ++idx[k - 1] == per[k - 1].nodes.size()) idx[--k] = 0;
        if (k == 0) break;
    }
}

double tuple_sum_at(const SplittingTuple& tuple, const MultiPoint& p) {
    double sum_f = 0.0;
    for (int i = 1; i <= tuple.config.N; ++i)
        sum_f += sample_value(tuple.funcs[static_cast<std::size_t>(i - 1)], p.block(i));
    return sum_f;
}

}  // namespace

CheckReport check_splitting_inequality(const SplittingTuple& tuple,
                                       const std::vector<Grid>* grids,
                                       const std::vector<MultiPoint>* gamma_points,
                                       double tol) {
    if (!grids && !gamma_points)
        throw ConfigError("check_splitting_inequality: need a grid or a point list");

    CheckReport report;
    report.verdict = Verdict::pass;

    if (grids) {
        double min_slack = kInf;
        nlohmann::json min_node;
        sweep_product(tuple, *grids, [&](const Eigen::MatrixXd& blocks, double sum_f, double cost) {
            if (!std::isfinite(sum_f)) return;  // infinite sum satisfies the inequality
            const double slack = sum_f - cost;
            if (slack < min_slack) {
                min_slack = slack;
                min_node = blocks_json(blocks);
            }
        });
        report.details["grid_min_slack"] = min_slack;
        report.details["grid_min_slack_node"] = min_node;
        report.margin = std::min(report.margin, min_slack);
        if (min_slack < -tol) {
            report.verdict = Verdict::fail;
            report.witness = {{"node", min_node}, {"slack", min_slack}};
        }
    }

    if (gamma_points) {
        double max_abs = 0.0;
        for (std::size_t k = 0; k < gamma_points->size(); ++k) {
            const auto& p = (*gamma_points)[k];
            if (p.config() != tuple.config)
                throw ConfigError("check_splitting_inequality: point config mismatch");
            const double slack = tuple_sum_at(tuple, p) - cost_eval(p);
            const double dev = std::abs(slack);
            max_abs = std::max(max_abs, dev);
            if (dev > tol && report.verdict == Verdict::pass) {
                report.verdict = Verdict::fail;
                report.margin = std::min(report.margin, -dev);
                report.witness = {{"point", blocks_json(p.coords())},
                                  {"point_index", k},
                                  {"slack", slack}};
                report.note = "splitting equality violated on a supplied point";
            }
        }
        report.details["gamma_point_count"] = gamma_points->size();
        report.details["gamma_max_abs_slack"] = max_abs;
    }
    return report;
}

std::vector<MultiPoint> splitting_set_extract(const SplittingTuple& tuple,
                                              const std::vector<Grid>& grids,
                                              std::optional<double> tol,
                                              std::optional<double> lipschitz) {
    validate_grids(tuple, grids);
    double L = 1.0;
    if (lipschitz) {
        L = *lipschitz;
    } else {
        bool any = false;
        for (int i = 0; i < tuple.config.N; ++i) {
            const auto& f = tuple.funcs[static_cast<std::size_t>(i)];
            const Eigen::MatrixXd* M = nullptr;
            if (f.kind() == ConvexFn::Kind::quadratic) M = &f.quadratic().M;
            if (f.kind() == ConvexFn::Kind::subspace_quadratic) M = &f.subspace_quadratic().M;
            if (!M) continue;
            const Grid& g = grids[static_cast<std::size_t>(i)];
            // gradient extremes of q_M over the box are attained at corners
            for (std::size_t corner = 0; corner < (1u << g.dim()); ++corner) {
                Eigen::VectorXd x(g.dim());
                for (int k = 0; k < g.dim(); ++k)
                    x[k] = (corner >> k) & 1u ? g.hi()[k] : g.lo()[k];
                L = any ? std::max(L, (*M * x).norm()) : (*M * x).norm();
                any = true;
            }
        }
        if (!any) L = 1.0;
    }
    double h = 0.0;
    for (const auto& g : grids) h = std::max(h, g.max_spacing());
    const double tol_eff = tol ? *tol : 5.0 * h * L;

    std::vector<MultiPoint> matches;
    double min_slack = kInf;
    nlohmann::json min_node;
    sweep_product(tuple, grids, [&](const Eigen::MatrixXd& blocks, double sum_f, double cost) {
        if (!std::isfinite(sum_f)) return;
        const double slack = sum_f - cost;
        if (slack < min_slack) {
            min_slack = slack;
            min_node = blocks_json(blocks);
        }
        if (std::abs(slack) <= tol_eff) matches.emplace_back(tuple.config, blocks);
    });
    if (min_slack < -tol_eff) {
        CheckReport pre;
        pre.verdict = Verdict::fail;
        pre.margin = min_slack;
        pre.witness = {{"node", min_node}, {"slack", min_slack}};
        throw PreconditionError("splitting_set_extract: c <= (+) f_i fails on the grid",
                                std::move(pre));
    }
    return matches;
}

CheckReport check_envelope_criterion(const SplittingTuple& tuple,
                                     const std::vector<Eigen::VectorXd>& probes,
                                     const GammaSet* gamma, const std::optional<Grid>& sample,
                                     double tol) {
    if (probes.empty())
        return CheckReport::inconclusive_with("no probe points supplied");

    // distance from a probe to S(Gamma), when Gamma is available
    std::vector<Eigen::VectorXd> sums;
    std::optional<Eigen::JacobiSVD<Eigen::MatrixXd>> sum_svd;
    Eigen::MatrixXd T;
    if (gamma) {
        if (gamma->config() != tuple.config)
            throw ConfigError("check_envelope_criterion: config mismatch");
        if (gamma->is_finite()) {
            for (const auto& p : materialize(*gamma, sample)) sums.push_back(sum_map(p));
        } else {
            T = Eigen::MatrixXd::Zero(tuple.config.d, tuple.config.d);
            for (const auto& Ti : gamma->maps()) T += Ti;
            sum_svd.emplace(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
        }
    }
    const auto distance_to_sum_range = [&](const Eigen::VectorXd& s) {
        if (!gamma) return kInf;
        if (sum_svd) return (T * sum_svd->solve(s) - s).norm();
        double best = kInf;
        for (const auto& v : sums) best = std::min(best, (v - s).norm());
        return best;
    };

    CheckReport report;
    report.verdict = Verdict::pass;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : probes) {
        if (s.size() != tuple.config.d)
            throw ConfigError("check_envelope_criterion: probe dimension mismatch");
        const double q = 0.5 * s.squaredNorm();
        double env_sum = 0.0;
        for (const auto& f : tuple.funcs) env_sum += q - moreau_envelope(f, s);
        const double scale = 1.0 + s.squaredNorm();
        const double slack = (q - env_sum) / scale;
        report.margin = std::min(report.margin, slack);

        std::string cls = "unclassified";
        if (gamma) {
            const double dist = distance_to_sum_range(s);
            if (dist <= 1e-9 * (1.0 + s.norm()))
                cls = "on";
            else if (dist >= 1e-2 * (1.0 + s.norm()))
                cls = "off";
        }
        rows.push_back({{"s", vec_json(s)},
                        {"sum_conjugate_envelopes", env_sum},
                        {"q", q},
                        {"slack", slack * scale},
                        {"class", cls}});

        if (slack < -tol && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.witness = {{"s", vec_json(s)}, {"slack", slack * scale}};
            report.note = "envelope sum exceeds q";
        } else if (cls == "on" && std::abs(slack) > tol && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.margin = std::min(report.margin, -std::abs(slack));
            report.witness = {{"s", vec_json(s)}, {"slack", slack * scale}};
            report.note = "equality fails at a probe in S(Gamma)";
        } else if (cls == "off" && slack <= tol && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.witness = {{"s", vec_json(s)}, {"slack", slack * scale}};
            report.note = "no strict slack at a probe certified off S(Gamma)";
        }
    }
    report.details["probes"] = rows;
    return report;
}

CheckReport check_prox_partition(const SplittingTuple& tuple,
                                 const std::vector<Eigen::VectorXd>& probes, double tol) {
    if (probes.empty())
        return CheckReport::inconclusive_with("no probe points supplied");
    CheckReport report;
    report.verdict = Verdict::pass;
    double worst = 0.0;
    for (const auto& s : probes) {
        if (s.size() != tuple.config.d)
            throw ConfigError("check_prox_partition: probe dimension mismatch");
        Eigen::VectorXd total = Eigen::VectorXd::Zero(tuple.config.d);
        for (const auto& f : tuple.funcs) total += prox(f, s);
        const double resid = (total - s).norm() / (1.0 + s.norm());
        worst = std::max(worst, resid);
        report.margin = std::min(report.margin, -resid);
        if (resid > tol && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.witness = {{"s", vec_json(s)},
                              {"prox_sum", vec_json(total)},
                              {"scaled_residual", resid}};
        }
    }
    report.details["max_scaled_residual"] = worst;
    return report;
}

CheckReport check_subdiff_identity(const SplittingTuple& tuple, const GammaSet& gamma,
                                   const std::optional<Grid>& sample, double tol) {
    if (gamma.config() != tuple.config)
        throw ConfigError("check_subdiff_identity: config mismatch");
    const auto pts = materialize(gamma, sample);

    CheckReport report;
    report.verdict = Verdict::pass;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Eigen::VectorXd total = sum_map(pts[k]);
        for (int i0 = 1; i0 <= tuple.config.N; ++i0) {
            const Eigen::VectorXd x = pts[k].block(i0);
            const Eigen::VectorXd g = total - x;
            const auto& f = tuple.funcs[static_cast<std::size_t>(i0 - 1)];
            if (f.is_smooth()) {
                const double resid = (f.gradient(x) - g).norm();
                report.margin = std::min(report.margin, -resid);
                if (resid > tol && report.verdict == Verdict::pass) {
                    report.verdict = Verdict::fail;
                    report.witness = {{"point_index", k},
                                      {"i0", i0},
                                      {"gradient_residual", resid}};
                }
                continue;
            }
            // nonsmooth: subgradient inequality against a probe set
            const double fx = sample_value(f, x);
            if (!std::isfinite(fx)) {
                report.verdict = Verdict::fail;
                report.margin = -kInf;
                report.witness = {{"point_index", k},
                                  {"i0", i0},
                                  {"reason", "point outside the effective domain"}};
                return report;
            }
            std::vector<Eigen::VectorXd> ys;
            if (f.kind() == ConvexFn::Kind::subspace_quadratic) {
                const auto& S = f.subspace_quadratic();
                const int dim_k = static_cast<int>(S.B.cols());
                if (dim_k == 0) {
                    ys.push_back(Eigen::VectorXd::Zero(tuple.config.d));
                } else {
                    const Eigen::VectorXd w0 = S.B.transpose() * x;
                    const Grid lattice = Grid::uniform(dim_k, -2.0, 2.0, 5);
                    for (std::size_t n = 0; n < lattice.node_count(); ++n)
                        ys.push_back(S.B * (w0 + lattice.node(n)));
                }
            } else {  // grid function: test against its own nodes
                const auto& G = f.grid_fn();
                for (std::size_t n = 0; n < G.grid.node_count(); ++n)
                    if (std::isfinite(G.values[n])) ys.push_back(G.grid.node(n));
            }
            for (const auto& y : ys) {
                const double fy = sample_value(f, y);
                if (!std::isfinite(fy)) continue;
                const double slack = fy - fx - g.dot(y - x);
                report.margin = std::min(report.margin, slack);
                if (slack < -tol && report.verdict == Verdict::pass) {
                    report.verdict = Verdict::fail;
                    report.witness = {{"point_index", k},
                                      {"i0", i0},
                                      {"y", vec_json(y)},
                                      {"subgradient_slack", slack}};
                }
            }
        }
    }
    return report;
}

CheckReport three_marginal_smooth_check(const ConvexFn& g, const ConvexFn& h,
                                        const std::vector<Grid>& grids,
                                        std::optional<double> tol,
                                        std::vector<Eigen::VectorXd> probes) {
    if (g.dim() != h.dim()) throw ConfigError("three_marginal_smooth_check: dimension mismatch");
    const int d = g.dim();
    if (grids.size() != 3) throw ConfigError("three_marginal_smooth_check: need three grids");
    for (const auto& grid : grids) {
        if (grid.dim() != d) throw ConfigError("three_marginal_smooth_check: grid dimension");
        for (int s : grid.steps())
            if (s < 3)
                return CheckReport::inconclusive_with(
                    "grid resolution too coarse for a trustworthy discrete conjugate");
    }

    const SplittingTuple tuple(SpaceConfig(3, d),
                               {make_quadratic(Eigen::MatrixXd::Zero(d, d)), g, h});
    const ConvexFn f = c_conjugate(tuple, 1, grids);

    if (probes.empty()) {
        // middle-half nodes of the first grid keep every inner argmin interior
        const Grid& g0 = grids[0];
        for (std::size_t k = 0; k < g0.node_count(); ++k) {
            const Eigen::VectorXd x = g0.node(k);
            bool inside = true;
            for (int a = 0; a < d && inside; ++a) {
                const double c = 0.5 * (g0.lo()[a] + g0.hi()[a]);
                inside = std::abs(x[a] - c) <= 0.25 * (g0.hi()[a] - g0.lo()[a]);
            }
            if (inside) probes.push_back(x);
        }
    }
    double h_max = 0.0;
    for (const auto& grid : grids) h_max = std::max(h_max, grid.max_spacing());
    const double tol_eff = tol ? *tol : 3.0 * h_max;

    CheckReport report;
    report.verdict = Verdict::pass;
    report.details["tolerance"] = tol_eff;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : probes) {
        const double q = 0.5 * s.squaredNorm();
        const double total =
            3.0 * q - moreau_envelope(f, s) - moreau_envelope(g, s) - moreau_envelope(h, s);
        const double dev = std::abs(total - q);
        rows.push_back({{"s", vec_json(s)}, {"sum_conjugate_envelopes", total}, {"q", q}});
        report.margin = std::min(report.margin, tol_eff - dev);
        if (dev > tol_eff && report.verdict == Verdict::pass) {
            report.verdict = Verdict::fail;
            report.witness = {{"s", vec_json(s)}, {"deviation", dev}};
        }
    }
    report.details["probes"] = rows;
    return report;
}

}  // namespace mm
