#include "semilin/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semilin/error.hpp"
#include "semilin/fft.hpp"

namespace semilin {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScalarField::ScalarField(DiskGrid grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(DiskGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error("field size does not match grid");
}

ScalarField ScalarField::from_function(const DiskGrid& grid, const std::function<double(cplx)>& fn) {
  ScalarField f(grid);
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) f(i, j) = fn(grid.node(i, j));
  return f;
}

double ScalarField::lp_norm(double p) const {
  if (std::isinf(p)) return sup_norm();
  double s = 0.0;
  const int nt = grid_.n_theta();
  for (int i = 0; i < grid_.n_r(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < nt; ++j) ring += std::pow(std::abs(values_[grid_.index(i, j)]), p);
    s += ring * grid_.cell_area(i);
  }
  return std::pow(s, 1.0 / p);
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::integral() const {
  double s = 0.0;
  for (int i = 0; i < grid_.n_r(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < grid_.n_theta(); ++j) ring += values_[grid_.index(i, j)];
    s += ring * grid_.cell_area(i);
  }
  return s;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

void ScalarField::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# scalar-field v1, grid=polar,n_r=" << grid_.n_r() << ",n_theta=" << grid_.n_theta() << "\n";
  out << "r,theta,value\n";
  for (int i = 0; i < grid_.n_r(); ++i)
    for (int j = 0; j < grid_.n_theta(); ++j)
      out << format_double(grid_.radius(i)) << ',' << format_double(grid_.angle(j)) << ','
          << format_double((*this)(i, j)) << '\n';
}

ScalarField ScalarField::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  int n_r = 0, n_theta = 0;
  if (std::sscanf(line.c_str(), "# scalar-field v1, grid=polar,n_r=%d,n_theta=%d", &n_r, &n_theta) != 2)
    throw Error("not a scalar-field v1 file: " + path);
  std::getline(in, line);
  DiskGrid grid(n_r, n_theta);
  std::vector<double> values;
  values.reserve(grid.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c2 = line.rfind(',');
    values.push_back(std::stod(line.substr(c2 + 1)));
  }
  return ScalarField(grid, std::move(values));
}

bool is_valid_boundary_size(int m) { return m >= 16 && (m & (m - 1)) == 0; }

BoundaryData::BoundaryData(std::vector<double> values) : values_(std::move(values)) {
  if (!is_valid_boundary_size(static_cast<int>(values_.size())))
    throw ConfigError("boundary data needs m >= 16 samples, a power of two");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("boundary data must be finite");
}

BoundaryData BoundaryData::from_function(int m, const std::function<double(double)>& fn) {
  std::vector<double> v(m);
  for (int j = 0; j < m; ++j) v[j] = fn(2.0 * kPi * j / m);
  return BoundaryData(std::move(v));
}

BoundaryData BoundaryData::constant(int m, double value) {
  return BoundaryData(std::vector<double>(m, value));
}

double BoundaryData::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}
double BoundaryData::min() const { return *std::min_element(values_.begin(), values_.end()); }
double BoundaryData::max() const { return *std::max_element(values_.begin(), values_.end()); }

double BoundaryData::evaluate(double t) const {
  const int m = size();
  std::vector<cplx> c(values_.begin(), values_.end());
  fft::forward(c.data(), m);
  double s = c[0].real();
  for (int k = 1; k < m / 2; ++k) s += 2.0 * (c[k] * std::polar(1.0, k * t)).real();
  s += c[m / 2].real() * std::cos(0.5 * m * t);
  return s / m;
}

BoundaryData BoundaryData::negated() const {
  std::vector<double> v(values_);
  for (double& x : v) x = -x;
  return BoundaryData(std::move(v));
}

void BoundaryData::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "# boundary-data v1, m=" << size() << "\n";
  out << "theta,value\n";
  for (int j = 0; j < size(); ++j) out << format_double(angle(j)) << ',' << format_double(values_[j]) << '\n';
}

BoundaryData BoundaryData::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::vector<double> v;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    v.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  return BoundaryData(std::move(v));
}

}  // namespace semilin
