#include "mm/json_io.hpp"

#include <cmath>
#include <limits>

namespace mm {
namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ParseError("expected an object", path);
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'", path);
    return *it;
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
    if (!j.is_object()) throw ParseError("expected an object", path);
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : keys) known |= item.key() == k;
        if (!known) throw ParseError("unknown key '" + item.key() + "'", path);
    }
}

double num_at(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError("expected a number", path);
    return j.get<double>();
}

int int_at(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ParseError("expected an integer", path);
    return j.get<int>();
}

Eigen::VectorXd vec_from(const json& j, const std::string& path, int expect = -1) {
    if (!j.is_array()) throw ParseError("expected an array of numbers", path);
    if (expect >= 0 && static_cast<int>(j.size()) != expect)
        throw ParseError("expected " + std::to_string(expect) + " entries", path);
    Eigen::VectorXd v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k)
        v[static_cast<Eigen::Index>(k)] = num_at(j[k], path + "[" + std::to_string(k) + "]");
    return v;
}

Eigen::MatrixXd mat_from(const json& j, const std::string& path, int rows = -1, int cols = -1) {
    if (!j.is_array() || j.empty()) throw ParseError("expected an array of rows", path);
    if (rows >= 0 && static_cast<int>(j.size()) != rows)
        throw ParseError("expected " + std::to_string(rows) + " rows", path);
    const auto ncols = j[0].is_array() ? j[0].size() : 0;
    if (cols >= 0 && static_cast<int>(ncols) != cols)
        throw ParseError("expected " + std::to_string(cols) + " columns", path);
    Eigen::MatrixXd m(j.size(), ncols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != ncols)
            throw ParseError("ragged matrix row", rp);
        for (std::size_t c = 0; c < ncols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                num_at(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

SpaceConfig config_from(const json& j, const std::string& path) {
    only_keys(j, {"N", "d"}, path);
    const int N = int_at(need(j, "N", path), path + ".N");
    const int d = int_at(need(j, "d", path), path + ".d");
    try {
        return SpaceConfig(N, d);
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), path);
    }
}

}  // namespace

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json point_to_json(const MultiPoint& p) {
    json a = json::array();
    for (int i = 1; i <= p.config().N; ++i) a.push_back(vec_to_json(p.block(i)));
    return a;
}

nlohmann::json to_json(const Grid& g) {
    return json{{"lo", vec_to_json(g.lo())}, {"hi", vec_to_json(g.hi())}, {"steps", g.steps()}};
}

Grid grid_from_json(const json& j, const std::string& path) {
    only_keys(j, {"lo", "hi", "steps"}, path);
    const Eigen::VectorXd lo = vec_from(need(j, "lo", path), path + ".lo");
    const Eigen::VectorXd hi = vec_from(need(j, "hi", path), path + ".hi");
    const json& js = need(j, "steps", path);
    if (!js.is_array()) throw ParseError("expected an array", path + ".steps");
    std::vector<int> steps;
    for (std::size_t k = 0; k < js.size(); ++k)
        steps.push_back(int_at(js[k], path + ".steps[" + std::to_string(k) + "]"));
    try {
        return Grid(lo, hi, steps);
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), path);
    }
}

nlohmann::json to_json(const GammaSet& gamma) {
    json body;
    if (gamma.is_finite()) {
        body["kind"] = "finite";
        json pts = json::array();
        for (const auto& p : gamma.points()) pts.push_back(point_to_json(p));
        body["points"] = std::move(pts);
    } else {
        body["kind"] = "linear";
        json mats = json::array();
        for (const auto& T : gamma.maps()) mats.push_back(mat_to_json(T));
        body["matrices"] = std::move(mats);
    }
    return json{{"config", {{"N", gamma.config().N}, {"d", gamma.config().d}}},
                {"body", std::move(body)}};
}

GammaSet gamma_from_json(const json& j, const std::string& path) {
    only_keys(j, {"config", "body"}, path);
    const SpaceConfig config = config_from(need(j, "config", path), path + ".config");
    const json& body = need(j, "body", path);
    const std::string bp = path + ".body";
    const json& kind = need(body, "kind", bp);
    if (!kind.is_string()) throw ParseError("expected a string", bp + ".kind");

    if (kind == "finite") {
        only_keys(body, {"kind", "points"}, bp);
        const json& jp = need(body, "points", bp);
        if (!jp.is_array() || jp.empty())
            throw ParseError("expected a nonempty array of points", bp + ".points");
        std::vector<MultiPoint> pts;
        for (std::size_t k = 0; k < jp.size(); ++k) {
            const std::string pp = bp + ".points[" + std::to_string(k) + "]";
            if (!jp[k].is_array() || static_cast<int>(jp[k].size()) != config.N)
                throw ParseError("expected " + std::to_string(config.N) + " blocks", pp);
            std::vector<Eigen::VectorXd> blocks;
            for (int i = 0; i < config.N; ++i)
                blocks.push_back(
                    vec_from(jp[k][static_cast<std::size_t>(i)],
                             pp + "[" + std::to_string(i) + "]", config.d));
            pts.emplace_back(config, blocks);
        }
        return GammaSet(config, std::move(pts));
    }
    if (kind == "linear") {
        only_keys(body, {"kind", "matrices"}, bp);
        const json& jm = need(body, "matrices", bp);
        if (!jm.is_array() || static_cast<int>(jm.size()) != config.N)
            throw ParseError("expected N matrices", bp + ".matrices");
        std::vector<Eigen::MatrixXd> maps;
        for (std::size_t k = 0; k < jm.size(); ++k)
            maps.push_back(mat_from(jm[k], bp + ".matrices[" + std::to_string(k) + "]",
                                    config.d, config.d));
        return GammaSet(config, std::move(maps));
    }
    throw ParseError("body kind must be 'finite' or 'linear'", bp + ".kind");
}

nlohmann::json to_json(const ConvexFn& f) {
    switch (f.kind()) {
        case ConvexFn::Kind::quadratic:
            return json{{"kind", "quadratic"}, {"matrix", mat_to_json(f.quadratic().M)}};
        case ConvexFn::Kind::subspace_quadratic: {
            const auto& s = f.subspace_quadratic();
            // emit d rows even when the basis has no columns
            json basis = json::array();
            for (Eigen::Index r = 0; r < s.B.rows(); ++r) {
                json row = json::array();
                for (Eigen::Index c = 0; c < s.B.cols(); ++c) row.push_back(s.B(r, c));
                basis.push_back(std::move(row));
            }
            return json{{"kind", "subspace_quadratic"},
                        {"basis", std::move(basis)},
                        {"matrix", mat_to_json(s.M)}};
        }
        case ConvexFn::Kind::grid: {
            const auto& g = f.grid_fn();
            json vals = json::array();
            for (double v : g.values) {
                if (std::isinf(v))
                    vals.push_back(nullptr);
                else
                    vals.push_back(v);
            }
            return json{{"kind", "grid"}, {"grid", to_json(g.grid)}, {"values", std::move(vals)}};
        }
        case ConvexFn::Kind::curve: {
            const auto& c = f.curve();
            json alphas = json::array();
            for (const auto& a : c.alphas)
                alphas.push_back({{"ts", a.ts()}, {"vals", a.vals()}});
            return json{{"kind", "curve"},
                        {"alphas", std::move(alphas)},
                        {"own_index", c.own_index}};
        }
    }
    throw Error("unreachable");
}

ConvexFn convexfn_from_json(const json& j, const std::string& path) {
    const json& kind = need(j, "kind", path);
    if (!kind.is_string()) throw ParseError("expected a string", path + ".kind");
    try {
        if (kind == "quadratic") {
            only_keys(j, {"kind", "matrix"}, path);
            return make_quadratic(mat_from(need(j, "matrix", path), path + ".matrix"));
        }
        if (kind == "subspace_quadratic") {
            only_keys(j, {"kind", "basis", "matrix"}, path);
            const json& jb = need(j, "basis", path);
            if (!jb.is_array() || jb.empty())
                throw ParseError("expected an array of rows", path + ".basis");
            const std::size_t cols = jb[0].is_array() ? jb[0].size() : 0;
            Eigen::MatrixXd B(jb.size(), cols);
            for (std::size_t r = 0; r < jb.size(); ++r) {
                const std::string rp = path + ".basis[" + std::to_string(r) + "]";
                if (!jb[r].is_array() || jb[r].size() != cols)
                    throw ParseError("ragged basis row", rp);
                for (std::size_t c = 0; c < cols; ++c)
                    B(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        num_at(jb[r][c], rp + "[" + std::to_string(c) + "]");
            }
            return make_subspace_quadratic(std::move(B),
                                           mat_from(need(j, "matrix", path), path + ".matrix"));
        }
        if (kind == "grid") {
            only_keys(j, {"kind", "grid", "values"}, path);
            Grid grid = grid_from_json(need(j, "grid", path), path + ".grid");
            const json& jv = need(j, "values", path);
            if (!jv.is_array()) throw ParseError("expected an array", path + ".values");
            std::vector<double> vals;
            vals.reserve(jv.size());
            for (std::size_t k = 0; k < jv.size(); ++k) {
                const std::string vp = path + ".values[" + std::to_string(k) + "]";
                if (jv[k].is_null())
                    vals.push_back(std::numeric_limits<double>::infinity());
                else
                    vals.push_back(num_at(jv[k], vp));
            }
            return make_grid_fn(std::move(grid), std::move(vals));
        }
        if (kind == "curve") {
            only_keys(j, {"kind", "alphas", "own_index"}, path);
            const json& ja = need(j, "alphas", path);
            if (!ja.is_array()) throw ParseError("expected an array", path + ".alphas");
            std::vector<MonotoneTable> tables;
            for (std::size_t k = 0; k < ja.size(); ++k) {
                const std::string ap = path + ".alphas[" + std::to_string(k) + "]";
                only_keys(ja[k], {"ts", "vals"}, ap);
                const Eigen::VectorXd ts = vec_from(need(ja[k], "ts", ap), ap + ".ts");
                const Eigen::VectorXd vs = vec_from(need(ja[k], "vals", ap), ap + ".vals");
                tables.emplace_back(std::vector<double>(ts.data(), ts.data() + ts.size()),
                                    std::vector<double>(vs.data(), vs.data() + vs.size()));
            }
            const int own = int_at(need(j, "own_index", path), path + ".own_index");
            return make_curve_antiderivative(std::move(tables), own);
        }
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), path);
    }
    throw ParseError("unknown function kind '" + kind.get<std::string>() + "'", path + ".kind");
}

nlohmann::json to_json(const SplittingTuple& tuple) {
    json funcs = json::array();
    for (const auto& f : tuple.funcs) funcs.push_back(to_json(f));
    return json{{"config", {{"N", tuple.config.N}, {"d", tuple.config.d}}},
                {"funcs", std::move(funcs)}};
}

SplittingTuple tuple_from_json(const json& j, const std::string& path) {
    only_keys(j, {"config", "funcs"}, path);
    const SpaceConfig config = config_from(need(j, "config", path), path + ".config");
    const json& jf = need(j, "funcs", path);
    if (!jf.is_array() || static_cast<int>(jf.size()) != config.N)
        throw ParseError("expected N function entries", path + ".funcs");
    std::vector<ConvexFn> funcs;
    for (std::size_t k = 0; k < jf.size(); ++k)
        funcs.push_back(convexfn_from_json(jf[k], path + ".funcs[" + std::to_string(k) + "]"));
    try {
        return SplittingTuple(config, std::move(funcs));
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), path);
    }
}

}  // namespace mm
