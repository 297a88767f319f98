#pragma once

#include "mm/convex.hpp"
#include "mm/core.hpp"

#include <nlohmann/json.hpp>

#include <string>

// JSON instance formats. Parsing is strict: unknown keys, missing keys and
// shape mismatches are rejected with the offending JSON path. +infinity grid
// values travel as null.

namespace mm {

nlohmann::json vec_to_json(const Eigen::VectorXd& v);
nlohmann::json mat_to_json(const Eigen::MatrixXd& m);  // row-major array of rows
nlohmann::json point_to_json(const MultiPoint& p);

nlohmann::json to_json(const Grid& g);
nlohmann::json to_json(const GammaSet& gamma);
nlohmann::json to_json(const ConvexFn& f);
nlohmann::json to_json(const SplittingTuple& tuple);

Grid grid_from_json(const nlohmann::json& j, const std::string& path = "$");
GammaSet gamma_from_json(const nlohmann::json& j, const std::string& path = "$");
ConvexFn convexfn_from_json(const nlohmann::json& j, const std::string& path = "$");
SplittingTuple tuple_from_json(const nlohmann::json& j, const std::string& path = "$");

}  // namespace mm
