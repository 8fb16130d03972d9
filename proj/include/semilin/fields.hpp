#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semilin/geometry.hpp"

namespace semilin {

// Real values on the nodes of a DiskGrid, ring-major.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(DiskGrid grid, double value = 0.0);
  ScalarField(DiskGrid grid, std::vector<double> values);
  static ScalarField from_function(const DiskGrid& grid, const std::function<double(cplx)>& fn);

  const DiskGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }

  // Cell-weighted (sum |v|^p a)^(1/p); p = inf gives the max norm.
  double lp_norm(double p) const;
  double sup_norm() const;
  double integral() const;
  double min() const;
  double max() const;

  void save_csv(const std::string& path) const;
  static ScalarField load_csv(const std::string& path);

 private:
  DiskGrid grid_;
  std::vector<double> values_;
};

// Samples at t_j = 2 pi j / m on the unit circle; m >= 16 and a power of two.
class BoundaryData {
 public:
  BoundaryData() = default;
  explicit BoundaryData(std::vector<double> values);
  static BoundaryData from_function(int m, const std::function<double(double)>& fn);
  static BoundaryData constant(int m, double value);

  int size() const { return static_cast<int>(values_.size()); }
  double angle(int j) const { return 2.0 * kPi * j / size(); }
  double operator[](int j) const { return values_[j]; }
  const std::vector<double>& values() const { return values_; }

  double sup_norm() const;
  double min() const;
  double max() const;
  // Trigonometric interpolant at angle t.
  double evaluate(double t) const;
  BoundaryData negated() const;

  void save_csv(const std::string& path) const;
  static BoundaryData load_csv(const std::string& path);

 private:
  std::vector<double> values_;
};

bool is_valid_boundary_size(int m);

// Shared CSV helpers: full round-trip precision.
std::string format_double(double v);

}  // namespace semilin
