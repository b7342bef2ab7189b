#include "omega_limit/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"

namespace omega_limit {

StateVec::StateVec(std::initializer_list<double> coords)
    : StateVec(std::span<const double>(coords.begin(), coords.size())) {}

StateVec::StateVec(std::span<const double> coords) {
  if (coords.empty() || coords.size() > kMaxDimension) {
    throw Error(ErrorKind::invalid_input,
                "state must have 1 to 3 coordinates, got " + std::to_string(coords.size()));
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw Error(ErrorKind::invalid_input, "state coordinate " + std::to_string(i) + " is not finite");
    }
    c_[i] = coords[i];
  }
  size_ = coords.size();
}

StateVec StateVec::zeros(std::size_t dimension) {
  if (dimension == 0 || dimension > kMaxDimension) {
    throw Error(ErrorKind::invalid_input, "dimension must be 1, 2 or 3");
  }
  StateVec v;
  v.size_ = dimension;
  return v;
}

bool StateVec::is_finite() const noexcept {
  return std::all_of(begin(), end(), [](double x) { return std::isfinite(x); });
}

double StateVec::squared_norm() const noexcept {
  double s = 0.0;
  for (double x : *this) s += x * x;
  return s;
}

double StateVec::norm() const noexcept { return std::sqrt(squared_norm()); }

std::string StateVec::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < size_; ++i) {
    if (i > 0) out += ", ";
    out += format_double(c_[i]);
  }
  return out + ")";
}

StateVec& StateVec::operator+=(const StateVec& other) noexcept {
  for (std::size_t i = 0; i < size_; ++i) c_[i] += other.c_[i];
  return *this;
}

StateVec& StateVec::operator-=(const StateVec& other) noexcept {
  for (std::size_t i = 0; i < size_; ++i) c_[i] -= other.c_[i];
  return *this;
}

StateVec& StateVec::operator*=(double s) noexcept {
  for (std::size_t i = 0; i < size_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const StateVec& a, const StateVec& b) noexcept {
  return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
}

StateVec operator+(StateVec a, const StateVec& b) noexcept { return a += b; }
StateVec operator-(StateVec a, const StateVec& b) noexcept { return a -= b; }
StateVec operator-(StateVec a) noexcept { return a *= -1.0; }
StateVec operator*(double s, StateVec a) noexcept { return a *= s; }
StateVec operator*(StateVec a, double s) noexcept { return a *= s; }

double distance(const StateVec& a, const StateVec& b) noexcept { return (a - b).norm(); }

double max_abs_difference(const StateVec& a, const StateVec& b) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Matrix::Matrix(std::size_t dimension, std::initializer_list<double> row_major) : n_(dimension) {
  if (dimension == 0 || dimension > kMaxDimension || row_major.size() != dimension * dimension) {
    throw Error(ErrorKind::invalid_input, "matrix initializer does not match dimension");
  }
  auto it = row_major.begin();
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) (*this)(i, j) = *it++;
  }
}

double Matrix::max_abs_entry() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  }
  return m;
}

StateVec Matrix::apply(const StateVec& v) const noexcept {
  StateVec out = StateVec::zeros(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

}  // namespace omega_limit
