#pragma once

#include <ftc/common.hpp>
#include <ftc/trajectory.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace ftc {

using Json = nlohmann::ordered_json;

/// Reals with 17 significant digits; non-finite values become null.
std::string format_real(double v);

/// Deterministic serializer: key order as inserted, reals via format_real.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const Vec& v);
Json to_json(const RowVec& v);
Vec vec_from_json(const Json& j);

/// `t,x0,...,x{n-1}` (or `psi` columns) with one row per node.
std::string trajectory_csv(const Trajectory& tr);
std::string costate_csv(const Costate& c);

}  // namespace ftc
