#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace semilin {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Cell-centred polar grid on the unit disk: r_i = (i + 1/2)/n_r, theta_j = 2 pi j / n_theta.
class DiskGrid {
 public:
  DiskGrid() = default;
  DiskGrid(int n_r, int n_theta);

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  std::size_t size() const { return static_cast<std::size_t>(n_r_) * n_theta_; }
  double dr() const { return 1.0 / n_r_; }
  double dtheta() const { return 2.0 * kPi / n_theta_; }
  double radius(int i) const { return (i + 0.5) / n_r_; }
  double inner_edge(int i) const { return static_cast<double>(i) / n_r_; }
  double outer_edge(int i) const { return static_cast<double>(i + 1) / n_r_; }
  double angle(int j) const { return dtheta() * j; }
  double cell_area(int i) const { return radius(i) * dr() * dtheta(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_theta_ + j; }
  cplx node(int i, int j) const { return std::polar(radius(i), angle(j)); }
  std::vector<cplx> nodes() const;
  double total_area() const;

  bool operator==(const DiskGrid& o) const { return n_r_ == o.n_r_ && n_theta_ == o.n_theta_; }

 private:
  int n_r_ = 0;
  int n_theta_ = 0;
};

// Uniform node grid: node (ix, iy) = origin + h (ix + i iy), stored row-major in iy.
struct CartesianGrid {
  int nx = 0;
  int ny = 0;
  cplx origin{};
  double h = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
  cplx node(int ix, int iy) const { return origin + cplx(h * ix, h * iy); }
  bool operator==(const CartesianGrid& o) const {
    return nx == o.nx && ny == o.ny && origin == o.origin && h == o.h;
  }
};

enum class BoundaryInterpolation { spline, linear };

// Simple closed curve, counterclockwise, through M >= 8 control points.
class JordanDomain {
 public:
  JordanDomain() = default;
  explicit JordanDomain(std::vector<cplx> points,
                        BoundaryInterpolation mode = BoundaryInterpolation::spline,
                        int samples_per_segment = 8);

  static JordanDomain disk(cplx center = 0.0, double radius = 1.0, int m = 256);
  static JordanDomain ellipse(double a, double b, int m = 256);
  static JordanDomain polygon(std::vector<cplx> vertices);
  // Unit disk minus a notch of the given width along [tip, 1] on the positive real axis.
  static JordanDomain slit_disk(double width = 0.01, double tip = 0.0, int m = 512);
  static JordanDomain load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<cplx>& control_points() const { return points_; }
  const std::vector<cplx>& polyline() const { return poly_; }
  BoundaryInterpolation interpolation() const { return mode_; }

  // Periodic parameter s in [0, 1), proportional to chord length between control points.
  cplx point_at(double s) const;
  cplx tangent_at(double s) const;
  // Parameter of the polyline sample closest to z.
  double nearest_parameter(cplx z) const;

  bool contains(cplx z) const;
  // Unsigned distance to the boundary polyline, valid everywhere.
  double distance(cplx z) const;
  double signed_area() const { return area_; }
  cplx centroid() const { return centroid_; }
  bool contains_origin() const { return contains(0.0); }
  double diameter() const;
  cplx bbox_lo() const { return lo_; }
  cplx bbox_hi() const { return hi_; }

 private:
  void build();
  void build_index();

  std::vector<cplx> points_;
  BoundaryInterpolation mode_ = BoundaryInterpolation::spline;
  int sub_ = 8;
  std::vector<double> knots_;  // cumulative chord length, size M+1
  std::vector<cplx> second_;   // spline second derivatives
  std::vector<cplx> poly_;
  std::vector<double> poly_s_;
  double area_ = 0.0;
  cplx centroid_{};
  cplx lo_{}, hi_{};

  struct SegmentIndex;
  std::shared_ptr<const SegmentIndex> index_;  // R-tree over polyline segments
};

// Euclidean distance from an interior point to the boundary.
double boundary_distance(const JordanDomain& domain, cplx z);

struct QuasihyperbolicOptions {
  int stencil = 16;  // 8, 16 or 32 neighbours
};

// Shortest-path quasihyperbolic distance on the lattice h Z^2 clipped to the domain.
// Endpoints snap to the nearest admissible lattice node.
double quasihyperbolic_distance(const JordanDomain& domain, cplx z, cplx z0, double resolution,
                                const QuasihyperbolicOptions& opts = {});

// Distances from z0 to many points in one graph search.
std::vector<double> quasihyperbolic_distances(const JordanDomain& domain, cplx z0,
                                              const std::vector<cplx>& targets,
                                              double resolution,
                                              const QuasihyperbolicOptions& opts = {});

struct QhbEstimate {
  double a = 0.0;
  double b = 0.0;
  double max_residual = 0.0;
  cplx base_point{};
  double resolution = 0.0;
  std::vector<cplx> samples;
  std::vector<double> k;        // k_D(z, z0)
  std::vector<double> log_ratio;  // ln(d(z0)/d(z))
};

struct QhbOptions {
  double resolution = 0.0;  // 0 selects diameter / 256
  QuasihyperbolicOptions metric{};
};

QhbEstimate estimate_qhb_constants(const JordanDomain& domain, cplx z0, int sample_count,
                                   const QhbOptions& opts = {});

// 2-D Halton point (bases 2 and 3), index starting at 1.
cplx halton2(std::uint64_t index);

}  // namespace semilin
