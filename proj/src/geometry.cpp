#include "semilin/geometry.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "semilin/error.hpp"

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace semilin {

struct JordanDomain::SegmentIndex {
  using Point = bg::model::point<double, 2, bg::cs::cartesian>;
  using Segment = bg::model::segment<Point>;
  using Value = std::pair<Segment, std::uint32_t>;
  explicit SegmentIndex(const std::vector<Value>& items) : tree(items.begin(), items.end()) {}
  bgi::rtree<Value, bgi::quadratic<16>> tree;
};

DiskGrid::DiskGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
  if (n_r < 1 || n_theta < 1) throw ConfigError("disk grid needs positive n_r and n_theta");
}

std::vector<cplx> DiskGrid::nodes() const {
  std::vector<cplx> out(size());
  for (int i = 0; i < n_r_; ++i)
    for (int j = 0; j < n_theta_; ++j) out[index(i, j)] = node(i, j);
  return out;
}

double DiskGrid::total_area() const {
  double s = 0.0;
  for (int i = 0; i < n_r_; ++i) s += cell_area(i) * n_theta_;
  return s;
}

namespace {

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

double point_segment_distance(cplx p, cplx a, cplx b, double* t_out = nullptr) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  if (t_out) *t_out = t;
  return std::abs(p - (a + t * d));
}

int orient(cplx a, cplx b, cplx c) {
  const double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

bool segments_intersect(cplx a, cplx b, cplx c, cplx d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  auto on = [](cplx p, cplx q, cplx r) {
    return std::min(p.real(), r.real()) <= q.real() && q.real() <= std::max(p.real(), r.real()) &&
           std::min(p.imag(), r.imag()) <= q.imag() && q.imag() <= std::max(p.imag(), r.imag());
  };
  if (o1 == 0 && on(a, c, b)) return true;
  if (o2 == 0 && on(a, d, b)) return true;
  if (o3 == 0 && on(c, a, d)) return true;
  if (o4 == 0 && on(c, b, d)) return true;
  return false;
}

// Solves the cyclic tridiagonal system sub[k] x[k-1] + diag[k] x[k] + sup[k] x[k+1] = rhs[k].
std::vector<cplx> solve_cyclic(std::vector<double> sub, std::vector<double> diag,
                               std::vector<double> sup, std::vector<cplx> rhs) {
  const std::size_t n = diag.size();
  const double alpha = sup[n - 1];  // couples x[n-1] -> x[0]
  const double beta = sub[0];       // couples x[0] -> x[n-1]
  const double gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= alpha * beta / gamma;
  auto thomas = [&](std::vector<cplx> r) {
    std::vector<double> c(n);
    std::vector<cplx> x(n);
    c[0] = sup[0] / diag[0];
    r[0] /= diag[0];
    for (std::size_t k = 1; k < n; ++k) {
      const double m = diag[k] - sub[k] * c[k - 1];
      c[k] = sup[k] / m;
      r[k] = (r[k] - sub[k] * r[k - 1]) / m;
    }
    x[n - 1] = r[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) x[k] = r[k] - c[k] * x[k + 1];
    return x;
  };
  std::vector<cplx> x = thomas(rhs);
  std::vector<cplx> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<cplx> z = thomas(u);
  const cplx fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t k = 0; k < n; ++k) x[k] -= fact * z[k];
  return x;
}

}  // namespace

JordanDomain::JordanDomain(std::vector<cplx> points, BoundaryInterpolation mode,
                           int samples_per_segment)
    : points_(std::move(points)), mode_(mode), sub_(samples_per_segment) {
  if (points_.size() < 8) throw ConfigError("jordan domain needs at least 8 boundary points");
  if (mode_ == BoundaryInterpolation::linear) sub_ = 1;
  if (sub_ < 1) sub_ = 1;
  build();
}

void JordanDomain::build() {
  const std::size_t m = points_.size();
  knots_.assign(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double len = std::abs(points_[(k + 1) % m] - points_[k]);
    if (len == 0.0) throw ConfigError("repeated boundary point");
    knots_[k + 1] = knots_[k] + len;
  }
  second_.assign(m, 0.0);
  if (mode_ == BoundaryInterpolation::spline) {
    std::vector<double> sub(m), diag(m), sup(m);
    std::vector<cplx> rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t km = (k + m - 1) % m, kp = (k + 1) % m;
      const double hm = knots_[k == 0 ? m : k] - knots_[k == 0 ? m - 1 : k - 1];
      const double hk = knots_[k + 1] - knots_[k];
      sub[k] = hm;
      diag[k] = 2.0 * (hm + hk);
      sup[k] = hk;
      rhs[k] = 6.0 * ((points_[kp] - points_[k]) / hk - (points_[k] - points_[km]) / hm);
    }
    second_ = solve_cyclic(sub, diag, sup, rhs);
  }

  poly_.clear();
  poly_s_.clear();
  const double total = knots_[m];
  for (std::size_t k = 0; k < m; ++k) {
    for (int s = 0; s < sub_; ++s) {
      const double t = knots_[k] + (knots_[k + 1] - knots_[k]) * s / sub_;
      poly_s_.push_back(t / total);
      poly_.push_back(point_at(t / total));
    }
  }

  const std::size_t n = poly_.size();
  double a2 = 0.0;
  cplx c{};
  lo_ = hi_ = poly_[0];
  for (std::size_t k = 0; k < n; ++k) {
    const cplx p = poly_[k], q = poly_[(k + 1) % n];
    const double w = cross(p, q);
    a2 += w;
    c += (p + q) * w;
    lo_ = {std::min(lo_.real(), p.real()), std::min(lo_.imag(), p.imag())};
    hi_ = {std::max(hi_.real(), p.real()), std::max(hi_.imag(), p.imag())};
  }
  area_ = 0.5 * a2;
  if (!(area_ > 0.0)) throw ConfigError("boundary must be positively oriented");
  centroid_ = c / (3.0 * a2);

  for (std::size_t i = 0; i < n; ++i) {
    const cplx a = poly_[i], b = poly_[(i + 1) % n];
    const double ax0 = std::min(a.real(), b.real()), ax1 = std::max(a.real(), b.real());
    const double ay0 = std::min(a.imag(), b.imag()), ay1 = std::max(a.imag(), b.imag());
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const cplx c2 = poly_[j], d2 = poly_[(j + 1) % n];
      if (std::max(c2.real(), d2.real()) < ax0 || std::min(c2.real(), d2.real()) > ax1 ||
          std::max(c2.imag(), d2.imag()) < ay0 || std::min(c2.imag(), d2.imag()) > ay1)
        continue;
      if (segments_intersect(a, b, c2, d2)) throw ConfigError("boundary is not simple");
    }
  }
  build_index();
}

void JordanDomain::build_index() {
  const std::size_t n = poly_.size();
  std::vector<SegmentIndex::Value> items;
  items.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx a = poly_[k], b = poly_[(k + 1) % n];
    items.emplace_back(SegmentIndex::Segment({a.real(), a.imag()}, {b.real(), b.imag()}),
                       static_cast<std::uint32_t>(k));
  }
  index_ = std::make_shared<const SegmentIndex>(items);
}

JordanDomain JordanDomain::disk(cplx center, double radius, int m) {
  std::vector<cplx> pts(m);
  for (int k = 0; k < m; ++k) pts[k] = center + std::polar(radius, 2.0 * kPi * k / m);
  return JordanDomain(std::move(pts));
}

JordanDomain JordanDomain::ellipse(double a, double b, int m) {
  std::vector<cplx> pts(m);
  for (int k = 0; k < m; ++k) {
    const double t = 2.0 * kPi * k / m;
    pts[k] = {a * std::cos(t), b * std::sin(t)};
  }
  return JordanDomain(std::move(pts));
}

JordanDomain JordanDomain::polygon(std::vector<cplx> vertices) {
  return JordanDomain(std::move(vertices), BoundaryInterpolation::linear);
}

JordanDomain JordanDomain::slit_disk(double width, double tip, int m) {
  const double a = std::asin(0.5 * width);
  std::vector<cplx> pts;
  for (int k = 0; k <= m; ++k) pts.push_back(std::polar(1.0, a + (2.0 * kPi - 2.0 * a) * k / m));
  pts.emplace_back(tip, -0.5 * width);
  pts.emplace_back(tip, 0.5 * width);
  return polygon(std::move(pts));
}

JordanDomain JordanDomain::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open domain file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# jordan-domain v1", 0) != 0)
    throw ConfigError("domain file lacks '# jordan-domain v1' header: " + path);
  BoundaryInterpolation mode = BoundaryInterpolation::spline;
  std::vector<cplx> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("interpolation linear") != std::string::npos) mode = BoundaryInterpolation::linear;
      continue;
    }
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y)) throw ConfigError("malformed domain line: " + line);
    pts.emplace_back(x, y);
  }
  return JordanDomain(std::move(pts), mode);
}

void JordanDomain::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# jordan-domain v1\n";
  if (mode_ == BoundaryInterpolation::linear) out << "# interpolation linear\n";
  out.precision(17);
  for (const cplx& p : points_) out << p.real() << ' ' << p.imag() << '\n';
}

cplx JordanDomain::point_at(double s) const {
  const std::size_t m = points_.size();
  const double total = knots_[m];
  double t = (s - std::floor(s)) * total;
  std::size_t k = std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
  k = std::clamp<std::size_t>(k, 1, m) - 1;
  const double h = knots_[k + 1] - knots_[k];
  const double B = (t - knots_[k]) / h, A = 1.0 - B;
  const cplx p0 = points_[k], p1 = points_[(k + 1) % m];
  return A * p0 + B * p1 + ((A * A * A - A) * second_[k] + (B * B * B - B) * second_[(k + 1) % m]) * (h * h / 6.0);
}

cplx JordanDomain::tangent_at(double s) const {
  const std::size_t m = points_.size();
  const double total = knots_[m];
  double t = (s - std::floor(s)) * total;
  std::size_t k = std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
  k = std::clamp<std::size_t>(k, 1, m) - 1;
  const double h = knots_[k + 1] - knots_[k];
  const double B = (t - knots_[k]) / h, A = 1.0 - B;
  const cplx p0 = points_[k], p1 = points_[(k + 1) % m];
  const cplx d = (p1 - p0) / h - (3.0 * A * A - 1.0) / 6.0 * h * second_[k] +
                 (3.0 * B * B - 1.0) / 6.0 * h * second_[(k + 1) % m];
  return d * total;
}

bool JordanDomain::contains(cplx z) const {
  const std::size_t n = poly_.size();
  bool inside = false;
  const double x = z.real(), y = z.imag();
  for (std::size_t k = 0, j = n - 1; k < n; j = k++) {
    const cplx a = poly_[k], b = poly_[j];
    if ((a.imag() > y) != (b.imag() > y)) {
      const double xc = a.real() + (y - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

double JordanDomain::distance(cplx z) const {
  const std::size_t n = poly_.size();
  double best = std::numeric_limits<double>::infinity();
  for (auto it = index_->tree.qbegin(bgi::nearest(SegmentIndex::Point(z.real(), z.imag()), 1));
       it != index_->tree.qend(); ++it) {
    const std::uint32_t s = it->second;
    best = std::min(best, point_segment_distance(z, poly_[s], poly_[(s + 1) % n]));
  }
  return best;
}

double JordanDomain::nearest_parameter(cplx z) const {
  const std::size_t n = poly_.size();
  double best = std::numeric_limits<double>::infinity(), s_best = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double t;
    const double d = point_segment_distance(z, poly_[k], poly_[(k + 1) % n], &t);
    if (d < best) {
      best = d;
      const double s1 = (k + 1 == n) ? 1.0 : poly_s_[k + 1];
      s_best = poly_s_[k] + t * (s1 - poly_s_[k]);
    }
  }
  return s_best - std::floor(s_best);
}

double JordanDomain::diameter() const {
  double d = 0.0;
  const std::size_t n = poly_.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 512);
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = i + stride; j < n; j += stride) d = std::max(d, std::abs(poly_[i] - poly_[j]));
  return d;
}

double boundary_distance(const JordanDomain& domain, cplx z) {
  if (!domain.contains(z)) throw Error("exterior point");
  return domain.distance(z);
}

cplx halton2(std::uint64_t index) {
  auto radical = [](std::uint64_t i, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= static_cast<double>(base);
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    return r;
  };
  return {radical(index, 2), radical(index, 3)};
}

namespace {

struct Offset {
  int dx, dy;
};

std::vector<Offset> stencil_offsets(int stencil) {
  std::vector<std::pair<int, int>> base{{1, 0}, {1, 1}};
  if (stencil >= 16) base.push_back({2, 1});
  if (stencil >= 32) {
    base.push_back({3, 1});
    base.push_back({3, 2});
  }
  if (stencil != 8 && stencil != 16 && stencil != 32)
    throw ConfigError("stencil must be 8, 16 or 32");
  std::vector<Offset> out;
  for (auto [a, b] : base) {
    const int variants[8][2] = {{a, b}, {-a, b}, {a, -b}, {-a, -b}, {b, a}, {-b, a}, {b, -a}, {-b, -a}};
    for (auto& v : variants) {
      Offset o{v[0], v[1]};
      bool dup = false;
      for (const Offset& e : out) dup = dup || (e.dx == o.dx && e.dy == o.dy);
      if (!dup) out.push_back(o);
    }
  }
  return out;
}

// Lattice h Z^2 clipped to the domain bounding box with lazily cached boundary distances.
class Lattice {
 public:
  Lattice(const JordanDomain& d, double h) : dom_(d), h_(h) {
    if (!(h > 0.0)) throw ConfigError("resolution must be positive");
    ax_ = static_cast<long>(std::ceil(d.bbox_lo().real() / h));
    ay_ = static_cast<long>(std::ceil(d.bbox_lo().imag() / h));
    nx_ = static_cast<long>(std::floor(d.bbox_hi().real() / h)) - ax_ + 1;
    ny_ = static_cast<long>(std::floor(d.bbox_hi().imag() / h)) - ay_ + 1;
    if (nx_ < 1 || ny_ < 1) throw Error("resolution too coarse");
    half_.assign(static_cast<std::size_t>(2 * nx_ - 1) * (2 * ny_ - 1), -2.0);
    build_inside();
  }

  long nx() const { return nx_; }
  long ny() const { return ny_; }
  std::size_t count() const { return static_cast<std::size_t>(nx_) * ny_; }
  cplx node(long ix, long iy) const { return {h_ * (ax_ + ix), h_ * (ay_ + iy)}; }

  // Boundary distance at half-lattice point (hx, hy); negative when outside.
  double half_distance(long hx, long hy) {
    double& v = half_[static_cast<std::size_t>(hy) * (2 * nx_ - 1) + hx];
    if (v == -2.0) {
      const cplx p{h_ * (ax_ + 0.5 * hx), h_ * (ay_ + 0.5 * hy)};
      v = inside_[static_cast<std::size_t>(hy) * (2 * nx_ - 1) + hx] ? dom_.distance(p) : -1.0;
    }
    return v;
  }
  double node_distance(long ix, long iy) { return half_distance(2 * ix, 2 * iy); }

  // Nearest admissible node to z.
  long snap(cplx z) {
    const double fx = z.real() / h_ - ax_, fy = z.imag() / h_ - ay_;
    long best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (long iy = static_cast<long>(std::floor(fy)) - 1; iy <= static_cast<long>(std::floor(fy)) + 2; ++iy)
      for (long ix = static_cast<long>(std::floor(fx)) - 1; ix <= static_cast<long>(std::floor(fx)) + 2; ++ix) {
        if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) continue;
        if (node_distance(ix, iy) <= 0.0) continue;
        const double d = std::abs(node(ix, iy) - z);
        if (d < bd) {
          bd = d;
          best = iy * nx_ + ix;
        }
      }
    if (best < 0) throw Error("resolution too coarse");
    return best;
  }

  std::vector<double> dijkstra(long source, const std::vector<Offset>& offs) {
    std::vector<double> dist(count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, long>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      const long ux = u % nx_, uy = u / nx_;
      for (const Offset& o : offs) {
        const long vx = ux + o.dx, vy = uy + o.dy;
        if (vx < 0 || vy < 0 || vx >= nx_ || vy >= ny_) continue;
        if (node_distance(vx, vy) <= 0.0) continue;
        const double len = h_ * std::hypot(o.dx, o.dy);
        const double dm = half_distance(2 * ux + o.dx, 2 * uy + o.dy);
        if (dm < 0.5 * len) continue;
        const double nd = d + len / dm;
        const long v = vy * nx_ + vx;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.push({nd, v});
        }
      }
    }
    return dist;
  }

 private:
  // Even-odd scanlines over the half lattice, with the crossing rule of JordanDomain::contains.
  void build_inside() {
    const long wx = 2 * nx_ - 1, wy = 2 * ny_ - 1;
    inside_.assign(static_cast<std::size_t>(wx) * wy, 0);
    const auto& poly = dom_.polyline();
    const std::size_t n = poly.size();
    std::vector<double> xs;
    for (long hy = 0; hy < wy; ++hy) {
      const double y = h_ * (ay_ + 0.5 * hy);
      xs.clear();
      for (std::size_t k = 0, j = n - 1; k < n; j = k++) {
        const cplx a = poly[k], b = poly[j];
        if ((a.imag() > y) != (b.imag() > y))
          xs.push_back(a.real() + (y - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag()));
      }
      std::sort(xs.begin(), xs.end());
      std::size_t below = 0;  // crossings with xc <= x
      for (long hx = 0; hx < wx; ++hx) {
        const double x = h_ * (ax_ + 0.5 * hx);
        while (below < xs.size() && xs[below] <= x) ++below;
        inside_[static_cast<std::size_t>(hy) * wx + hx] = ((xs.size() - below) & 1u) != 0;
      }
    }
  }

  const JordanDomain& dom_;
  double h_;
  long ax_ = 0, ay_ = 0, nx_ = 0, ny_ = 0;
  std::vector<double> half_;
  std::vector<std::uint8_t> inside_;
};

}  // namespace

std::vector<double> quasihyperbolic_distances(const JordanDomain& domain, cplx z0,
                                              const std::vector<cplx>& targets, double resolution,
                                              const QuasihyperbolicOptions& opts) {
  if (!domain.contains(z0)) throw Error("exterior point");
  for (const cplx& z : targets)
    if (!domain.contains(z)) throw Error("exterior point");
  const auto offs = stencil_offsets(opts.stencil);
  Lattice lat(domain, resolution);
  const long s = lat.snap(z0);
  const std::vector<double> dist = lat.dijkstra(s, offs);
  std::vector<double> out;
  out.reserve(targets.size());
  for (const cplx& z : targets) {
    const double d = dist[lat.snap(z)];
    if (!std::isfinite(d)) throw Error("resolution too coarse");
    out.push_back(d);
  }
  return out;
}

double quasihyperbolic_distance(const JordanDomain& domain, cplx z, cplx z0, double resolution,
                                const QuasihyperbolicOptions& opts) {
  return quasihyperbolic_distances(domain, z0, {z}, resolution, opts)[0];
}

QhbEstimate estimate_qhb_constants(const JordanDomain& domain, cplx z0, int sample_count,
                                   const QhbOptions& opts) {
  if (sample_count < 8) throw Error("insufficient samples");
  if (!domain.contains(z0)) throw Error("exterior point");
  const double h = opts.resolution > 0.0 ? opts.resolution : domain.diameter() / 256.0;
  const auto offs = stencil_offsets(opts.metric.stencil);
  Lattice lat(domain, h);
  const long s0 = lat.snap(z0);
  const std::vector<double> dist = lat.dijkstra(s0, offs);
  const cplx n0 = lat.node(s0 % lat.nx(), s0 / lat.nx());
  const double d0 = domain.distance(n0);

  QhbEstimate est;
  est.base_point = z0;
  est.resolution = h;
  const cplx lo = domain.bbox_lo(), span = domain.bbox_hi() - domain.bbox_lo();
  const std::uint64_t max_tries = 1000ull * sample_count;
  for (std::uint64_t i = 1; i <= max_tries && static_cast<int>(est.samples.size()) < sample_count; ++i) {
    const cplx u = halton2(i);
    const cplx z = lo + cplx(u.real() * span.real(), u.imag() * span.imag());
    if (!domain.contains(z) || domain.distance(z) < 2.0 * h) continue;
    const long s = lat.snap(z);
    if (!std::isfinite(dist[s])) continue;
    const cplx node = lat.node(s % lat.nx(), s / lat.nx());
    est.samples.push_back(node);
    est.k.push_back(dist[s]);
    est.log_ratio.push_back(std::log(d0 / domain.distance(node)));
  }
  const std::size_t n = est.samples.size();
  if (n < 8) throw Error("insufficient samples");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += est.log_ratio[i];
    sy += est.k[i];
    sxx += est.log_ratio[i] * est.log_ratio[i];
    sxy += est.log_ratio[i] * est.k[i];
  }
  const double den = n * sxx - sx * sx;
  est.a = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  if (est.a < 0.0) est.a = 0.0;
  est.b = (sy - est.a * sx) / n;
  for (std::size_t i = 0; i < n; ++i)
    est.max_residual = std::max(est.max_residual, est.k[i] - est.a * est.log_ratio[i] - est.b);
  return est;
}

}  // namespace semilin
