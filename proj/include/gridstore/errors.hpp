#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace gridstore {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Raised by the closed-form solvers, which are derived for two microgrids only.
class NotTwoPlayer : public Error {
 public:
  using Error::Error;
};

// Opponent stores nothing, so the split point A is undefined.
class DegenerateOpponentStrategy : public Error {
 public:
  using Error::Error;
};

class MissingProspectParams : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoCoveragePrice : public Error {
 public:
  NoCoveragePrice(const std::string& what, double price_ceiling)
      : Error(what), price_ceiling_(price_ceiling) {}
  double price_ceiling() const { return price_ceiling_; }

 private:
  double price_ceiling_;
};

/// Best-response iteration fell into a period-2 orbit. Both points of the
/// orbit are kept so callers can report them.
class CycleDetected : public Error {
 public:
  CycleDetected(const std::string& what, Eigen::VectorXd first,
                Eigen::VectorXd second, int iterations)
      : Error(what),
        first_(std::move(first)),
        second_(std::move(second)),
        iterations_(iterations) {}

  const Eigen::VectorXd& first() const { return first_; }
  const Eigen::VectorXd& second() const { return second_; }
  int iterations() const { return iterations_; }

 private:
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  int iterations_;
};

}  // namespace gridstore
