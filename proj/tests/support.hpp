#pragma once

#include <ftc/attain.hpp>
#include <ftc/chattering.hpp>
#include <ftc/commands.hpp>
#include <ftc/integrate.hpp>
#include <ftc/pmp.hpp>
#include <ftc/relaxed.hpp>
#include <ftc/systems.hpp>

#include <initializer_list>
#include <random>

namespace ftc_test {

inline ftc::Vec vec(std::initializer_list<double> v) {
  ftc::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline ftc::RowVec row(std::initializer_list<double> v) { return vec(v).transpose(); }

inline ftc::ReferencePair pair_of(const ftc::Scenario& sc, const std::string& name, int cells = 1000) {
  return ftc::resolve_pair(sc, sc.pair(name), cells);
}

inline std::vector<ftc::VariationDirection> directions_of(const ftc::Scenario& sc, const std::string& name,
                                                          const ftc::ReferencePair& pair) {
  std::vector<ftc::VariationDirection> dirs;
  for (const auto& t : sc.pair(name).directions) dirs.push_back(ftc::make_direction(t, pair.control));
  return dirs;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(1.0, std::abs(want));
  return std::abs(got - want) / scale;
}

}  // namespace ftc_test
