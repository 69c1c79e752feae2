#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ftc {

using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;

// Error kinds map one-to-one onto the C API status codes.
enum class ErrorKind {
  Input,        // dimension or shape mismatch, malformed request
  Domain,       // argument outside the valid domain (time span, weights)
  Lookup,       // unknown scenario / pair / control id
  Divergence,   // non-finite state during integration
  Unsupported,  // configuration the numerical method does not cover
  Config,       // CLI / request configuration problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double t, const std::string& what)
      : Error(ErrorKind::Divergence, what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    fail(ErrorKind::Input, std::string(what) + ": expected dimension " + std::to_string(want) +
                               ", got " + std::to_string(got));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace ftc
