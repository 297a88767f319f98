#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Spaces, points, relation representations and the cost/sum geometry that the
// monotonicity and convex-analysis checks are built on. Everything here is an
// immutable value; operations are pure functions of their inputs.

namespace mm {

inline constexpr double kDefaultTol = 1e-9;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dimension or marginal-count mismatch, or an invariant violated at construction.
struct ConfigError : Error {
    using Error::Error;
};

/// Operation not defined for the given representation (e.g. shifting a linear set).
struct UnsupportedError : Error {
    using Error::Error;
};

/// Numeric-domain failure (bisection bracket, off-grid evaluation, ...).
struct DomainError : Error {
    using Error::Error;
};

/// JSON schema violation; `path` points at the offending element.
struct ParseError : Error {
    std::string path;
    ParseError(const std::string& msg, std::string p)
        : Error(msg + " (at " + p + ")"), path(std::move(p)) {}
};

// ---------------------------------------------------------------------------
// Space and points
// ---------------------------------------------------------------------------

/// Marginal count N (>= 2) and the common marginal dimension d (>= 1).
struct SpaceConfig {
    int N = 0;
    int d = 0;

    SpaceConfig() = default;
    SpaceConfig(int N_, int d_) : N(N_), d(d_) {
        if (N < 2) throw ConfigError("SpaceConfig: N must be >= 2");
        if (d < 1) throw ConfigError("SpaceConfig: d must be >= 1");
    }

    bool operator==(const SpaceConfig&) const = default;
};

/// One element x = (x_1,...,x_N) of the product space; block i is a d-vector.
class MultiPoint {
public:
    MultiPoint(SpaceConfig config, Eigen::MatrixXd coords);
    MultiPoint(SpaceConfig config, const std::vector<Eigen::VectorXd>& blocks);

    const SpaceConfig& config() const { return config_; }

    /// Block of marginal i (1-based).
    Eigen::VectorXd block(int i) const;

    /// d x N matrix, one column per marginal.
    const Eigen::MatrixXd& coords() const { return coords_; }

    bool operator==(const MultiPoint& other) const;

    MultiPoint operator+(const MultiPoint& other) const;
    MultiPoint operator-(const MultiPoint& other) const;

    double norm() const { return coords_.norm(); }

private:
    SpaceConfig config_;
    Eigen::MatrixXd coords_;  // d x N
};

// ---------------------------------------------------------------------------
// Index subsets
// ---------------------------------------------------------------------------

/// Nonempty proper subset K of {1,...,N}, used to select the split operator A_K.
class IndexSubset {
public:
    IndexSubset(std::vector<int> members, int N);

    static IndexSubset from_mask(unsigned mask, int N);

    const std::vector<int>& members() const { return members_; }
    std::vector<int> complement() const;
    int space_size() const { return N_; }
    bool contains(int i) const;

private:
    std::vector<int> members_;  // sorted, 1-based
    int N_;
};

/// All proper nonempty K containing marginal 1 (one representative per {K, I\K} pair).
std::vector<IndexSubset> proper_subsets_containing_first(int N);

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Uniform lattice over a box, endpoints included; at least 2 nodes per axis.
class Grid {
public:
    Grid(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<int> steps);

    /// Convenience: same bounds and node count on every axis.
    static Grid uniform(int dim, double lo, double hi, int steps);

    int dim() const { return static_cast<int>(steps_.size()); }
    std::size_t node_count() const { return node_count_; }
    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }
    const std::vector<int>& steps() const { return steps_; }

    double spacing(int axis) const;
    double max_spacing() const;
    double coord(int axis, int idx) const;

    /// Node at flat index (row-major, last axis fastest).
    Eigen::VectorXd node(std::size_t flat) const;
    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& mi) const;

    /// Flat index of the node that equals x, if x lies on the lattice.
    std::optional<std::size_t> locate(const Eigen::VectorXd& x, double tol = 1e-9) const;

    bool operator==(const Grid& other) const;

private:
    Eigen::VectorXd lo_, hi_;
    std::vector<int> steps_;
    std::size_t node_count_;
};

// ---------------------------------------------------------------------------
// Gamma sets
// ---------------------------------------------------------------------------

/// Finite relation: ordered point list, exact duplicates removed.
struct FinitePoints {
    std::vector<MultiPoint> points;
};

/// Linear relation {(T_1 v, ..., T_N v) | v in R^d}; one d x d matrix per marginal.
struct LinearParam {
    std::vector<Eigen::MatrixXd> maps;
};

/// A multi-marginal relation Gamma, finite or linearly parameterized.
class GammaSet {
public:
    GammaSet(SpaceConfig config, std::vector<MultiPoint> points);
    GammaSet(SpaceConfig config, std::vector<Eigen::MatrixXd> maps);

    const SpaceConfig& config() const { return config_; }
    bool is_finite() const { return std::holds_alternative<FinitePoints>(body_); }
    bool is_linear() const { return std::holds_alternative<LinearParam>(body_); }

    const std::vector<MultiPoint>& points() const;
    const std::vector<Eigen::MatrixXd>& maps() const;

private:
    SpaceConfig config_;
    std::variant<FinitePoints, LinearParam> body_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// c(x) = sum_{i<j} <x_i, x_j>, summed in ascending index order.
double cost_eval(const MultiPoint& x);

/// S(x) = x_1 + ... + x_N.
Eigen::VectorXd sum_map(const MultiPoint& x);

using MarginalProjection = std::variant<std::vector<Eigen::VectorXd>, Eigen::MatrixXd>;

/// Gamma_i: the i-th blocks of a finite set, or the matrix T_i of a linear one.
MarginalProjection project_marginal(const GammaSet& gamma, int i);

/// Gamma_{i,j} as a per-point pair list; linear sets are sampled on `sample`.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> project_pair(
    const GammaSet& gamma, int i, int j, const std::optional<Grid>& sample = std::nullopt);

/// Orthogonal projection onto {sum x_i = 0}: removes the block mean.
MultiPoint delta_perp_project(const MultiPoint& x);

/// Translate every stored point by x. Finite sets only.
GammaSet shift_gamma(const GammaSet& gamma, const MultiPoint& x);

/// Concrete point sample of Gamma. Finite sets pass through; linear sets are
/// evaluated on the parameter grid (required in that case).
std::vector<MultiPoint> materialize(const GammaSet& gamma,
                                    const std::optional<Grid>& parameter_grid);

/// Default parameter grid for sampling linear sets: [-2,2]^d, 5 nodes per axis.
Grid default_param_grid(int d);

}  // namespace mm
