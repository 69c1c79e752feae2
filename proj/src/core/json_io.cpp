#include <ftc/json_io.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ftc {

std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << "," << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j)
        if (e.is_structured()) flat = false;
      if (flat) {
        os << "[";
        for (size_t k = 0; k < j.size(); ++k) {
          if (k) os << ", ";
          write(os, j[k], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[" << nl;
      for (size_t k = 0; k < j.size(); ++k) {
        if (k) os << "," << nl;
        os << pad;
        write(os, j[k], indent, depth + 1);
      }
      os << nl << close_pad << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_real(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  os << "\n";
  return os.str();
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const RowVec& v) { return to_json(Vec(v.transpose())); }

Vec vec_from_json(const Json& j) {
  if (j.is_number()) {
    Vec v(1);
    v[0] = j.get<double>();
    return v;
  }
  if (!j.is_array()) fail(ErrorKind::Config, "expected a number or an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(ErrorKind::Config, "expected an array of numbers");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

namespace {

template <class Samples>
std::string rows_csv(const Mesh& mesh, const Samples& samples, const char* prefix) {
  std::ostringstream os;
  const Eigen::Index n = samples.empty() ? 0 : samples.front().size();
  os << "t";
  for (Eigen::Index k = 0; k < n; ++k) os << "," << prefix << k;
  os << "\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    os << format_real(mesh.node(static_cast<int>(i)));
    for (Eigen::Index k = 0; k < n; ++k) os << "," << format_real(samples[i](k));
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string trajectory_csv(const Trajectory& tr) { return rows_csv(tr.mesh, tr.samples, "x"); }

std::string costate_csv(const Costate& c) { return rows_csv(c.mesh, c.samples, "psi"); }

}  // namespace ftc
