#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace omega_limit {

inline constexpr std::size_t kMaxDimension = 3;

/// A point in phase space with 1 to 3 coordinates.
///
/// Public constructors reject non-finite input. Arithmetic operators do not
/// re-check, so the integrator can detect blow-up itself.
class StateVec {
 public:
  StateVec() = default;
  StateVec(std::initializer_list<double> coords);
  explicit StateVec(std::span<const double> coords);

  static StateVec zeros(std::size_t dimension);

  std::size_t size() const noexcept { return size_; }
  double operator[](std::size_t i) const noexcept { return c_[i]; }
  double& operator[](std::size_t i) noexcept { return c_[i]; }

  std::span<const double> coords() const noexcept { return {c_.data(), size_}; }
  const double* begin() const noexcept { return c_.data(); }
  const double* end() const noexcept { return c_.data() + size_; }

  bool is_finite() const noexcept;
  double norm() const noexcept;
  double squared_norm() const noexcept;

  std::string to_string() const;

  StateVec& operator+=(const StateVec& other) noexcept;
  StateVec& operator-=(const StateVec& other) noexcept;
  StateVec& operator*=(double s) noexcept;

  friend bool operator==(const StateVec& a, const StateVec& b) noexcept;

 private:
  std::array<double, kMaxDimension> c_{};
  std::size_t size_ = 0;
};

StateVec operator+(StateVec a, const StateVec& b) noexcept;
StateVec operator-(StateVec a, const StateVec& b) noexcept;
StateVec operator-(StateVec a) noexcept;
StateVec operator*(double s, StateVec a) noexcept;
StateVec operator*(StateVec a, double s) noexcept;

double distance(const StateVec& a, const StateVec& b) noexcept;
double max_abs_difference(const StateVec& a, const StateVec& b) noexcept;

/// Dense row-major square matrix of dimension 1 to 3.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dimension) : n_(dimension) {}
  Matrix(std::size_t dimension, std::initializer_list<double> row_major);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * kMaxDimension + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * kMaxDimension + j]; }

  double max_abs_entry() const noexcept;
  StateVec apply(const StateVec& v) const noexcept;

 private:
  std::array<double, kMaxDimension * kMaxDimension> a_{};
  std::size_t n_ = 0;
};

}  // namespace omega_limit
