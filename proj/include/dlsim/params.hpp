#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dlsim {

// Flat model parameter vector. Every node in an experiment shares one fixed
// dimension; all arithmetic is plain dense double math.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  ParamVector& operator+=(const ParamVector& other) {
    check_same_dim(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  ParamVector& operator-=(const ParamVector& other) {
    check_same_dim(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }
  ParamVector& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }
  ParamVector& operator/=(double c) { return *this *= (1.0 / c); }

  // y += c * x, the workhorse of every aggregation loop.
  void axpy(double c, const ParamVector& x) {
    check_same_dim(x);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * x.values_[i];
  }

  bool operator==(const ParamVector& other) const = default;

 private:
  void check_same_dim(const ParamVector& other) const {
    if (values_.size() != other.values_.size()) {
      throw std::invalid_argument("ParamVector dimension mismatch: " +
                                  std::to_string(values_.size()) + " vs " +
                                  std::to_string(other.values_.size()));
    }
  }

  std::vector<double> values_;
};

inline ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
inline ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
inline ParamVector operator*(double c, ParamVector a) { return a *= c; }
inline ParamVector operator*(ParamVector a, double c) { return a *= c; }
inline ParamVector operator/(ParamVector a, double c) { return a /= c; }

inline double dot(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(const ParamVector& a) { return dot(a, a); }
inline double norm(const ParamVector& a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("squared_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const ParamVector& a, const ParamVector& b) {
  return std::sqrt(squared_distance(a, b));
}

inline bool all_finite(const ParamVector& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) return false;
  }
  return true;
}

}  // namespace dlsim
