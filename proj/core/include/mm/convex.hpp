#pragma once

#include "mm/core.hpp"
#include "mm/report.hpp"

#include <memory>
#include <optional>
#include <variant>
#include <vector>

// Convex-function catalog with proximal mappings, Moreau envelopes, Fenchel and
// multi-marginal conjugation, and the splitting-tuple checks built on them.

namespace mm {

// ---------------------------------------------------------------------------
// Tabulated strictly increasing scalar maps
// ---------------------------------------------------------------------------

/// Strictly increasing map R -> R known at sample points, alpha(0) = 0.
/// Evaluation interpolates linearly; the inverse is found by bisection.
class MonotoneTable {
public:
    MonotoneTable(std::vector<double> ts, std::vector<double> vals);

    double operator()(double t) const;
    double inverse(double v) const;

    double t_min() const { return ts_.front(); }
    double t_max() const { return ts_.back(); }
    double v_min() const { return vals_.front(); }
    double v_max() const { return vals_.back(); }

    const std::vector<double>& ts() const { return ts_; }
    const std::vector<double>& vals() const { return vals_; }

private:
    std::vector<double> ts_, vals_;
};

// ---------------------------------------------------------------------------
// Function catalog
// ---------------------------------------------------------------------------

/// q_M(x) = 1/2 <x, Mx> with M symmetric positive semidefinite.
struct Quadratic {
    Eigen::MatrixXd M;
};

/// Indicator of range(B) plus q_M; B has orthonormal columns (k may be 0).
struct SubspaceQuadratic {
    Eigen::MatrixXd B;  // d x k
    Eigen::MatrixXd M;  // d x d
};

/// Values known at lattice nodes only; +infinity entries allowed.
struct GridFn {
    Grid grid;
    std::vector<double> values;
};

/// f_i(x) = integral_0^x sum_{k != i} alpha_k(alpha_i^{-1}(t)) dt, d = 1.
struct CurveAntiderivative {
    std::vector<MonotoneTable> alphas;
    int own_index;  // 1-based
};

class ConvexFn {
public:
    enum class Kind { quadratic, subspace_quadratic, grid, curve };

    explicit ConvexFn(Quadratic q);
    explicit ConvexFn(SubspaceQuadratic q);
    explicit ConvexFn(GridFn g);
    explicit ConvexFn(CurveAntiderivative c);

    Kind kind() const;
    int dim() const { return dim_; }

    const Quadratic& quadratic() const;
    const SubspaceQuadratic& subspace_quadratic() const;
    const GridFn& grid_fn() const;
    const CurveAntiderivative& curve() const;

    /// Function value; +infinity off the effective domain. Grid functions are
    /// defined at their nodes only and reject off-node arguments.
    double value(const Eigen::VectorXd& x) const;

    /// Gradient for the smooth kinds (quadratic, curve antiderivative).
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

    bool is_smooth() const;

private:
    std::variant<Quadratic, SubspaceQuadratic, GridFn, CurveAntiderivative> body_;
    int dim_;
};

ConvexFn make_quadratic(Eigen::MatrixXd M);
ConvexFn make_subspace_quadratic(Eigen::MatrixXd B, Eigen::MatrixXd M);
ConvexFn make_grid_fn(Grid grid, std::vector<double> values);
ConvexFn make_curve_antiderivative(std::vector<MonotoneTable> alphas, int own_index);

/// N convex functions over a shared space, one per marginal.
struct SplittingTuple {
    SpaceConfig config;
    std::vector<ConvexFn> funcs;

    SplittingTuple(SpaceConfig config, std::vector<ConvexFn> funcs);
};

// ---------------------------------------------------------------------------
// Prox, envelope, conjugates
// ---------------------------------------------------------------------------

/// argmin_y f(y) + 1/2 ||y - s||^2. Closed form for quadratics, bisection on
/// the tabulated derivative for curves, node argmin for grid functions
/// (approximate; lexicographically first node on ties).
Eigen::VectorXd prox(const ConvexFn& f, const Eigen::VectorXd& s);

/// e_f(s) = f(prox_f s) + 1/2 ||s - prox_f s||^2.
double moreau_envelope(const ConvexFn& f, const Eigen::VectorXd& s);

struct ConjugateResult {
    ConvexFn fn;
    bool boundary_warning = false;           // sup attained on the sampling boundary
    std::vector<std::size_t> boundary_nodes; // dual nodes whose argmax hit the boundary
};

/// Fenchel conjugate. Positive definite quadratics are conjugated in closed
/// form; everything else goes through the discrete Legendre transform onto
/// `dual_grid` (grid functions default to their own lattice).
ConjugateResult fenchel_conjugate(const ConvexFn& f,
                                  const std::optional<Grid>& dual_grid = std::nullopt);

/// Exact discrete Legendre transform of 1-D samples: out[j] = max_i us[j]*xs[i] - vals[i].
/// Hull-based sweep, linear in the node counts; `argmax` receives the attaining
/// sample index per dual node when non-null.
std::vector<double> legendre_transform_1d(const std::vector<double>& xs,
                                          const std::vector<double>& vals,
                                          const std::vector<double>& us,
                                          std::vector<int>* argmax = nullptr);

/// Multi-marginal conjugate of the tuple with slot i0 removed, evaluated on
/// grids[i0-1]: sup over the product of the other grids of c(x) - sum f_i(x_i).
ConvexFn c_conjugate(const SplittingTuple& tuple, int i0, const std::vector<Grid>& grids);

struct RelaxResult {
    SplittingTuple tuple;
    double last_pass_max_change = 0.0;
};

/// Iterated conjugation sweep turning a dominating tuple into a conjugate one:
/// f_1 from the tail, then each middle slot from the mixed tuple, then f_N.
/// Requires c <= (+) f_i on the product grid (PreconditionError otherwise).
RelaxResult relax_to_c_conjugate(const SplittingTuple& tuple, const std::vector<Grid>& grids,
                                 int passes);

// ---------------------------------------------------------------------------
// Splitting checks
// ---------------------------------------------------------------------------

/// c <= (+) f_i over the product grid and/or equality on the given points.
/// Either source may be null, not both.
CheckReport check_splitting_inequality(const SplittingTuple& tuple,
                                       const std::vector<Grid>* grids,
                                       const std::vector<MultiPoint>* gamma_points,
                                       double tol = kDefaultTol);

/// Product-grid nodes where (+) f_i and c agree within tol. Default tolerance
/// 5*h*L, with L the largest quadratic-part gradient over the boxes.
std::vector<MultiPoint> splitting_set_extract(const SplittingTuple& tuple,
                                              const std::vector<Grid>& grids,
                                              std::optional<double> tol = std::nullopt,
                                              std::optional<double> lipschitz = std::nullopt);

/// sum_i e_{f_i^*}(s) <= q(s) at every probe, with equality exactly on S(Gamma)
/// when Gamma is supplied (e_{f^*} = q - e_f via Moreau's decomposition).
CheckReport check_envelope_criterion(const SplittingTuple& tuple,
                                     const std::vector<Eigen::VectorXd>& probes,
                                     const GammaSet* gamma = nullptr,
                                     const std::optional<Grid>& sample = std::nullopt,
                                     double tol = kDefaultTol);

/// sum_i prox_{f_i} = Id within tol*(1+||s||) at every probe.
CheckReport check_prox_partition(const SplittingTuple& tuple,
                                 const std::vector<Eigen::VectorXd>& probes,
                                 double tol = kDefaultTol);

/// sum_{i != i0} x_i in subdiff f_{i0}(x_{i0}) on every materialized point:
/// gradient identity for smooth entries, subgradient inequality otherwise.
CheckReport check_subdiff_identity(const SplittingTuple& tuple, const GammaSet& gamma,
                                   const std::optional<Grid>& sample = std::nullopt,
                                   double tol = kDefaultTol);

/// Three-marginal conjugacy check: with f = (g (+) h)^c on the grids, verifies
/// e_{f^*} + e_{g^*} + e_{h^*} = q at the probes (defaults to the middle of the
/// first grid) within tol (defaults to 3h).
CheckReport three_marginal_smooth_check(const ConvexFn& g, const ConvexFn& h,
                                        const std::vector<Grid>& grids,
                                        std::optional<double> tol = std::nullopt,
                                        std::vector<Eigen::VectorXd> probes = {});

}  // namespace mm
