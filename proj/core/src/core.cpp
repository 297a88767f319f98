#include "mm/core.hpp"

#include <algorithm>
#include <cmath>

namespace mm {

// ---------------------------------------------------------------------------
// MultiPoint
// ---------------------------------------------------------------------------

MultiPoint::MultiPoint(SpaceConfig config, Eigen::MatrixXd coords)
    : config_(config), coords_(std::move(coords)) {
    if (coords_.rows() != config_.d || coords_.cols() != config_.N)
        throw ConfigError("MultiPoint: coordinate matrix must be d x N");
    if (!coords_.allFinite())
        throw ConfigError("MultiPoint: all entries must be finite");
}

MultiPoint::MultiPoint(SpaceConfig config, const std::vector<Eigen::VectorXd>& blocks)
    : config_(config), coords_(config.d, config.N) {
    if (static_cast<int>(blocks.size()) != config_.N)
        throw ConfigError("MultiPoint: expected exactly N blocks");
    for (int i = 0; i < config_.N; ++i) {
        if (blocks[i].size() != config_.d)
            throw ConfigError("MultiPoint: block " + std::to_string(i + 1) +
                              " has wrong dimension");
        coords_.col(i) = blocks[i];
    }
    if (!coords_.allFinite())
        throw ConfigError("MultiPoint: all entries must be finite");
}

Eigen::VectorXd MultiPoint::block(int i) const {
    if (i < 1 || i > config_.N) throw ConfigError("MultiPoint::block: index out of range");
    return coords_.col(i - 1);
}

bool MultiPoint::operator==(const MultiPoint& other) const {
    return config_ == other.config_ && coords_ == other.coords_;
}

MultiPoint MultiPoint::operator+(const MultiPoint& other) const {
    if (config_ != other.config_) throw ConfigError("MultiPoint: config mismatch");
    return MultiPoint(config_, coords_ + other.coords_);
}

MultiPoint MultiPoint::operator-(const MultiPoint& other) const {
    if (config_ != other.config_) throw ConfigError("MultiPoint: config mismatch");
    return MultiPoint(config_, coords_ - other.coords_);
}

// ---------------------------------------------------------------------------
// IndexSubset
// ---------------------------------------------------------------------------

IndexSubset::IndexSubset(std::vector<int> members, int N)
    : members_(std::move(members)), N_(N) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (members_.empty()) throw ConfigError("IndexSubset: K must be nonempty");
    if (members_.front() < 1 || members_.back() > N_)
        throw ConfigError("IndexSubset: members must lie in {1,...,N}");
    if (static_cast<int>(members_.size()) == N_)
        throw ConfigError("IndexSubset: K must be a proper subset");
}

IndexSubset IndexSubset::from_mask(unsigned mask, int N) {
    std::vector<int> m;
    for (int i = 1; i <= N; ++i)
        if (mask & (1u << (i - 1))) m.push_back(i);
    return IndexSubset(std::move(m), N);
}

std::vector<int> IndexSubset::complement() const {
    std::vector<int> out;
    for (int i = 1; i <= N_; ++i)
        if (!contains(i)) out.push_back(i);
    return out;
}

bool IndexSubset::contains(int i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
}

std::vector<IndexSubset> proper_subsets_containing_first(int N) {
    std::vector<IndexSubset> out;
    const unsigned full = (1u << N) - 1u;
    for (unsigned mask = 1u; mask < full; mask += 2u)  // bit 0 set, never the full set
        out.push_back(IndexSubset::from_mask(mask, N));
    return out;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Grid::Grid(Eigen::VectorXd lo, Eigen::VectorXd hi, std::vector<int> steps)
    : lo_(std::move(lo)), hi_(std::move(hi)), steps_(std::move(steps)) {
    const auto dim = static_cast<Eigen::Index>(steps_.size());
    if (dim < 1) throw ConfigError("Grid: dimension must be >= 1");
    if (lo_.size() != dim || hi_.size() != dim)
        throw ConfigError("Grid: lo/hi/steps sizes must agree");
    node_count_ = 1;
    for (Eigen::Index k = 0; k < dim; ++k) {
        if (!(lo_[k] < hi_[k])) throw ConfigError("Grid: lo < hi required per axis");
        if (steps_[k] < 2) throw ConfigError("Grid: at least 2 nodes per axis");
        node_count_ *= static_cast<std::size_t>(steps_[k]);
    }
}

Grid Grid::uniform(int dim, double lo, double hi, int steps) {
    return Grid(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi),
                std::vector<int>(static_cast<std::size_t>(dim), steps));
}

double Grid::spacing(int axis) const {
    return (hi_[axis] - lo_[axis]) / (steps_[static_cast<std::size_t>(axis)] - 1);
}

double Grid::max_spacing() const {
    double h = 0.0;
    for (int k = 0; k < dim(); ++k) h = std::max(h, spacing(k));
    return h;
}

double Grid::coord(int axis, int idx) const {
    return lo_[axis] + idx * spacing(axis);
}

Eigen::VectorXd Grid::node(std::size_t flat) const {
    const auto mi = multi_index(flat);
    Eigen::VectorXd x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = coord(k, mi[static_cast<std::size_t>(k)]);
    return x;
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
    std::vector<int> mi(steps_.size());
    for (int k = dim() - 1; k >= 0; --k) {
        const auto s = static_cast<std::size_t>(steps_[static_cast<std::size_t>(k)]);
        mi[static_cast<std::size_t>(k)] = static_cast<int>(flat % s);
        flat /= s;
    }
    return mi;
}

std::size_t Grid::flat_index(const std::vector<int>& mi) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < steps_.size(); ++k)
        flat = flat * static_cast<std::size_t>(steps_[k]) + static_cast<std::size_t>(mi[k]);
    return flat;
}

std::optional<std::size_t> Grid::locate(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != dim()) return std::nullopt;
    std::vector<int> mi(steps_.size());
    for (int k = 0; k < dim(); ++k) {
        const double t = (x[k] - lo_[k]) / spacing(k);
        const int idx = static_cast<int>(std::lround(t));
        if (idx < 0 || idx >= steps_[static_cast<std::size_t>(k)]) return std::nullopt;
        if (std::abs(x[k] - coord(k, idx)) > tol * (1.0 + std::abs(x[k]))) return std::nullopt;
        mi[static_cast<std::size_t>(k)] = idx;
    }
    return flat_index(mi);
}

bool Grid::operator==(const Grid& other) const {
    return lo_ == other.lo_ && hi_ == other.hi_ && steps_ == other.steps_;
}

// ---------------------------------------------------------------------------
// GammaSet
// ---------------------------------------------------------------------------

GammaSet::GammaSet(SpaceConfig config, std::vector<MultiPoint> points) : config_(config) {
    if (points.empty()) throw ConfigError("GammaSet: finite body must be nonempty");
    std::vector<MultiPoint> unique;
    unique.reserve(points.size());
    for (auto& p : points) {
        if (p.config() != config_) throw ConfigError("GammaSet: point config mismatch");
        // exact bitwise dedup; near-duplicates are kept
        if (std::find(unique.begin(), unique.end(), p) == unique.end())
            unique.push_back(std::move(p));
    }
    body_ = FinitePoints{std::move(unique)};
}

GammaSet::GammaSet(SpaceConfig config, std::vector<Eigen::MatrixXd> maps) : config_(config) {
    if (static_cast<int>(maps.size()) != config_.N)
        throw ConfigError("GammaSet: expected N parameterization matrices");
    for (const auto& T : maps) {
        if (T.rows() != config_.d || T.cols() != config_.d)
            throw ConfigError("GammaSet: parameterization matrices must be d x d");
        if (!T.allFinite()) throw ConfigError("GammaSet: matrix entries must be finite");
    }
    body_ = LinearParam{std::move(maps)};
}

const std::vector<MultiPoint>& GammaSet::points() const {
    if (!is_finite()) throw UnsupportedError("GammaSet: not a finite point set");
    return std::get<FinitePoints>(body_).points;
}

const std::vector<Eigen::MatrixXd>& GammaSet::maps() const {
    if (!is_linear()) throw UnsupportedError("GammaSet: not a linear parameterization");
    return std::get<LinearParam>(body_).maps;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double cost_eval(const MultiPoint& x) {
    const auto& c = x.coords();
    double total = 0.0;
    for (int i = 0; i < c.cols(); ++i)
        for (int j = i + 1; j < c.cols(); ++j) total += c.col(i).dot(c.col(j));
    return total;
}

Eigen::VectorXd sum_map(const MultiPoint& x) { return x.coords().rowwise().sum(); }

MarginalProjection project_marginal(const GammaSet& gamma, int i) {
    if (i < 1 || i > gamma.config().N)
        throw ConfigError("project_marginal: index out of range");
    if (gamma.is_linear()) return gamma.maps()[static_cast<std::size_t>(i - 1)];
    std::vector<Eigen::VectorXd> blocks;
    blocks.reserve(gamma.points().size());
    for (const auto& p : gamma.points()) blocks.push_back(p.block(i));
    return blocks;
}

std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> project_pair(
    const GammaSet& gamma, int i, int j, const std::optional<Grid>& sample) {
    if (i < 1 || j > gamma.config().N || !(i < j))
        throw ConfigError("project_pair: requires 1 <= i < j <= N");
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> out;
    for (const auto& p : materialize(gamma, sample))
        out.emplace_back(p.block(i), p.block(j));
    return out;
}

MultiPoint delta_perp_project(const MultiPoint& x) {
    const Eigen::VectorXd mean = sum_map(x) / x.config().N;
    Eigen::MatrixXd c = x.coords();
    c.colwise() -= mean;
    return MultiPoint(x.config(), std::move(c));
}

GammaSet shift_gamma(const GammaSet& gamma, const MultiPoint& x) {
    if (gamma.config() != x.config()) throw ConfigError("shift_gamma: config mismatch");
    if (!gamma.is_finite())
        throw UnsupportedError("shift_gamma: linear parameterizations cannot be shifted");
    std::vector<MultiPoint> shifted;
    shifted.reserve(gamma.points().size());
    for (const auto& p : gamma.points()) shifted.push_back(p + x);
    return GammaSet(gamma.config(), std::move(shifted));
}

std::vector<MultiPoint> materialize(const GammaSet& gamma,
                                    const std::optional<Grid>& parameter_grid) {
    if (gamma.is_finite()) return gamma.points();
    if (!parameter_grid)
        throw UnsupportedError("materialize: linear set requires a parameter grid");
    const Grid& grid = *parameter_grid;
    if (grid.dim() != gamma.config().d)
        throw ConfigError("materialize: parameter grid dimension must equal d");
    const auto& maps = gamma.maps();
    std::vector<MultiPoint> out;
    out.reserve(grid.node_count());
    for (std::size_t f = 0; f < grid.node_count(); ++f) {
        const Eigen::VectorXd v = grid.node(f);
        Eigen::MatrixXd c(gamma.config().d, gamma.config().N);
        for (int i = 0; i < gamma.config().N; ++i) c.col(i) = maps[static_cast<std::size_t>(i)] * v;
        out.emplace_back(gamma.config(), std::move(c));
    }
    return out;
}

Grid default_param_grid(int d) { return Grid::uniform(d, -2.0, 2.0, 5); }

}  // namespace mm
