#include "semilin/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "semilin/error.hpp"
#include "semilin/oracles.hpp"

namespace semilin {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"domain", {"type", "radius", "center_x", "center_y", "a", "b", "points", "path", "samples", "width", "tip",
                  "interpolation"}},
      {"matrix", {"type", "K", "a11", "a12", "a22", "path"}},
      {"boundary", {"type", "value", "mode", "amplitude", "offset", "coefficients", "path", "samples"}},
      {"nonlinearity", {"type", "q", "lambda", "delta", "sign", "clamp", "value"}},
      {"multiplier", {"type", "value", "path"}},
      {"solver", {"tau_steps", "damping", "inner_tol", "max_inner", "p", "divergence_margin", "scheme",
                  "anderson_depth", "probes", "seed", "consistency_tol", "n_r", "n_theta", "weak_trials",
                  "weak_quadrature", "dead_core_eps"}},
      {"beltrami", {"grid_n", "k_max", "smoothing", "margin", "max_neumann", "neumann_tol", "boundary_samples",
                    "theodorsen_max", "theodorsen_tol", "rotation", "center_x", "center_y", "mark_x", "mark_y"}},
      {"qhyp", {"x0", "y0", "resolution", "stencil", "samples", "targets"}},
  };
  return keys;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string s = text;
  for (char& ch : s)
    if (ch == ';' || ch == ',') ch = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw ConfigError("bad number in " + key + ": " + tok);
    out.push_back(v);
  }
  return out;
}

std::vector<cplx> parse_points(const std::string& key, const std::string& text) {
  const std::vector<double> v = parse_numbers(key, text);
  if (v.size() % 2 != 0) throw ConfigError(key + " needs x y pairs");
  std::vector<cplx> out;
  for (std::size_t k = 0; k < v.size(); k += 2) out.emplace_back(v[k], v[k + 1]);
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key outside a section: " + section);
    for (const auto& [key, value] : body) c.values_[section + "." + key] = value.get_value<std::string>();
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Config c = parse(ss.str());
  c.base_dir_ = std::filesystem::path(path).parent_path().string();
  if (c.base_dir_.empty()) c.base_dir_ = ".";
  return c;
}

void Config::save(const std::string& path) const {
  pt::ptree tree;
  for (const auto& [k, v] : values_) {
    std::string value = v;
    const std::string pk = k.substr(k.find('.') + 1);
    if (pk == "path") value = resolve_path(v);
    tree.put(pt::ptree::path_type(k, '.'), value);
  }
  try {
    pt::write_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(std::string("cannot write config: ") + e.what());
  }
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be section.key=value: " + assignment);
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Config::set(const std::string& key, const std::string& value) {
  if (key.find('.') == std::string::npos) throw ConfigError("key must be section.key: " + key);
  values_[key] = value;
}

bool Config::has_section(const std::string& section) const {
  const std::string prefix = section + ".";
  for (const auto& [k, v] : values_)
    if (k.compare(0, prefix.size(), prefix) == 0) return true;
  return false;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key " + key);
  return it->second;
}

double Config::number(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return require_number(key);
}

double Config::require_number(const std::string& key) const {
  const std::string s = require(key);
  const std::vector<double> v = parse_numbers(key, s);
  if (v.size() != 1) throw ConfigError("expected one number for " + key + ", got '" + s + "'");
  return v[0];
}

int Config::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = require_number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer for " + key);
  return static_cast<int>(v);
}

std::uint64_t Config::unsigned64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string s = require(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("expected an unsigned integer for " + key);
  return v;
}

void Config::validate() const {
  const auto& keys = known_keys();
  for (const auto& [k, v] : values_) {
    const auto dot = k.find('.');
    const std::string section = k.substr(0, dot), key = k.substr(dot + 1);
    auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("unknown config section [" + section + "]");
    if (!it->second.count(key)) throw ConfigError("unknown config key " + k);
  }
}

std::string Config::resolve_path(const std::string& p) const {
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_dir_) / path).lexically_normal().string();
}

JordanDomain build_domain(const Config& c) {
  const std::string type = c.get("domain.type", "disk");
  const cplx center(c.number("domain.center_x", 0.0), c.number("domain.center_y", 0.0));
  const int samples = c.integer("domain.samples", 256);
  if (type == "disk") return JordanDomain::disk(center, c.number("domain.radius", 1.0), samples);
  if (type == "ellipse") {
    JordanDomain e = JordanDomain::ellipse(c.require_number("domain.a"), c.require_number("domain.b"), samples);
    if (center == 0.0) return e;
    std::vector<cplx> pts = e.control_points();
    for (cplx& p : pts) p += center;
    return JordanDomain(pts);
  }
  if (type == "polygon") return JordanDomain::polygon(parse_points("domain.points", c.require("domain.points")));
  if (type == "slit_disk")
    return JordanDomain::slit_disk(c.number("domain.width", 0.01), c.number("domain.tip", 0.0), samples);
  if (type == "points") {
    const std::string mode = c.get("domain.interpolation", "spline");
    if (mode != "spline" && mode != "linear") throw ConfigError("domain.interpolation must be spline or linear");
    return JordanDomain(parse_points("domain.points", c.require("domain.points")),
                        mode == "linear" ? BoundaryInterpolation::linear : BoundaryInterpolation::spline);
  }
  if (type == "file") return JordanDomain::load(c.resolve_path(c.require("domain.path")));
  throw ConfigError("unknown domain.type " + type);
}

MatrixFn build_matrix(const Config& c) {
  const std::string type = c.get("matrix.type", "identity");
  if (type == "identity") return [](cplx) { return SymMatrix2{}; };
  if (type == "constant") {
    const SymMatrix2 A{c.require_number("matrix.a11"), c.number("matrix.a12", 0.0), c.require_number("matrix.a22")};
    if (!(A.a11 > 0.0 && A.det() > 0.0)) throw ConfigError("matrix must be positive definite");
    if (std::abs(A.det() - 1.0) > 1e-9) throw ConfigError("matrix must have determinant 1");
    return [A](cplx) { return A; };
  }
  if (type == "radial_stretch") {
    const RadialStretch rs = radial_stretch_reference(c.number("matrix.K", 2.0));
    return [rs](cplx z) { return rs.matrix(z); };
  }
  if (type == "file") {
    auto field = std::make_shared<MatrixField>(MatrixField::load_csv(c.resolve_path(c.require("matrix.path"))));
    return [field](cplx z) { return field->evaluate(z); };
  }
  throw ConfigError("unknown matrix.type " + type);
}

std::function<double(double)> build_boundary(const Config& c) {
  const std::string type = c.get("boundary.type", "constant");
  if (type == "constant") {
    const double v = c.number("boundary.value", 0.0);
    return [v](double) { return v; };
  }
  if (type == "cos" || type == "sin") {
    const double k = c.number("boundary.mode", 1.0), a = c.number("boundary.amplitude", 1.0),
                 o = c.number("boundary.offset", 0.0);
    if (k != std::floor(k)) throw ConfigError("boundary.mode must be an integer");
    if (type == "cos") return [k, a, o](double s) { return o + a * std::cos(2.0 * kPi * k * s); };
    return [k, a, o](double s) { return o + a * std::sin(2.0 * kPi * k * s); };
  }
  if (type == "fourier") {
    // a0 a1 b1 a2 b2 ...
    const std::vector<double> co = parse_numbers("boundary.coefficients", c.require("boundary.coefficients"));
    if (co.empty()) throw ConfigError("boundary.coefficients is empty");
    return [co](double s) {
      double v = co[0];
      for (std::size_t k = 1; 2 * k - 1 < co.size(); ++k) {
        const double t = 2.0 * kPi * k * s;
        v += co[2 * k - 1] * std::cos(t) + (2 * k < co.size() ? co[2 * k] * std::sin(t) : 0.0);
      }
      return v;
    };
  }
  if (type == "file") {
    auto data = std::make_shared<BoundaryData>(BoundaryData::load_csv(c.resolve_path(c.require("boundary.path"))));
    return [data](double s) { return data->evaluate(2.0 * kPi * s); };
  }
  throw ConfigError("unknown boundary.type " + type);
}

Nonlinearity build_nonlinearity(const Config& c) {
  const std::string type = c.get("nonlinearity.type", "zero");
  Nonlinearity f = make_zero();
  if (type == "zero")
    f = make_zero();
  else if (type == "constant")
    f = make_constant(c.require_number("nonlinearity.value"));
  else if (type == "power")
    f = make_power(c.require_number("nonlinearity.q"));
  else if (type == "signed_power")
    f = make_signed_power(c.require_number("nonlinearity.q"));
  else if (type == "exponential") {
    const double sign = c.number("nonlinearity.sign", 1.0);
    if (sign != 1.0 && sign != -1.0) throw ConfigError("nonlinearity.sign must be 1 or -1");
    const std::string clamp = c.get("nonlinearity.clamp", "10");
    const double T = clamp == "inf" ? std::numeric_limits<double>::infinity() : c.number("nonlinearity.clamp", 10.0);
    f = make_exponential(c.require_number("nonlinearity.delta"), static_cast<int>(sign), T);
  } else
    throw ConfigError("unknown nonlinearity.type " + type);
  const double lambda = c.number("nonlinearity.lambda", 1.0);
  return lambda == 1.0 ? f : f.scaled(lambda);
}

ContinuationOptions build_continuation(const Config& c) {
  ContinuationOptions o;
  o.tau_steps = c.integer("solver.tau_steps", o.tau_steps);
  o.damping = c.number("solver.damping", o.damping);
  o.inner_tol = c.number("solver.inner_tol", o.inner_tol);
  o.max_inner = c.integer("solver.max_inner", o.max_inner);
  o.p = c.number("solver.p", o.p);
  o.divergence_margin = c.number("solver.divergence_margin", o.divergence_margin);
  o.scheme = parse_scheme(c.get("solver.scheme", scheme_name(o.scheme)));
  o.anderson_depth = c.integer("solver.anderson_depth", o.anderson_depth);
  o.probes = c.integer("solver.probes", o.probes);
  o.seed = c.unsigned64("solver.seed", o.seed);
  o.consistency_tol = c.number("solver.consistency_tol", o.consistency_tol);
  if (o.tau_steps < 1) throw ConfigError("solver.tau_steps must be positive");
  if (!(o.damping > 0.0 && o.damping <= 1.0)) throw ConfigError("solver.damping must lie in (0,1]");
  if (!(o.inner_tol > 0.0)) throw ConfigError("solver.inner_tol must be positive");
  if (o.max_inner < 1) throw ConfigError("solver.max_inner must be positive");
  if (!(o.p > 1.0)) throw ConfigError("solver.p must exceed 1");
  if (!(o.divergence_margin >= 1.0)) throw ConfigError("solver.divergence_margin must be >= 1");
  if (o.probes < 0) throw ConfigError("solver.probes must be >= 0");
  return o;
}

BeltramiOptions build_beltrami(const Config& c) {
  BeltramiOptions o;
  o.grid_n = c.integer("beltrami.grid_n", o.grid_n);
  o.k_max = c.number("beltrami.k_max", o.k_max);
  o.smoothing = c.number("beltrami.smoothing", o.smoothing);
  o.margin = c.number("beltrami.margin", o.margin);
  o.max_neumann = c.integer("beltrami.max_neumann", o.max_neumann);
  o.neumann_tol = c.number("beltrami.neumann_tol", o.neumann_tol);
  o.boundary_samples = c.integer("beltrami.boundary_samples", o.boundary_samples);
  o.theodorsen_max = c.integer("beltrami.theodorsen_max", o.theodorsen_max);
  o.theodorsen_tol = c.number("beltrami.theodorsen_tol", o.theodorsen_tol);
  o.rotation = c.number("beltrami.rotation", o.rotation);
  if (c.has("beltrami.center_x") || c.has("beltrami.center_y"))
    o.center = cplx(c.number("beltrami.center_x", 0.0), c.number("beltrami.center_y", 0.0));
  if (c.has("beltrami.mark_x") || c.has("beltrami.mark_y"))
    o.mark = cplx(c.number("beltrami.mark_x", 0.0), c.number("beltrami.mark_y", 0.0));
  const DiskGrid g = build_disk_grid(c);
  o.inverse_n_r = g.n_r();
  o.inverse_n_theta = g.n_theta();
  return o;
}

DiskGrid build_disk_grid(const Config& c) {
  const int nr = c.integer("solver.n_r", 128), nt = c.integer("solver.n_theta", 128);
  if (nr < 4 || nt < 8 || nt % 4 != 0) throw ConfigError("solver.n_r >= 4 and solver.n_theta a multiple of 4 >= 8");
  return DiskGrid(nr, nt);
}

PipelineOptions build_pipeline(const Config& c) {
  PipelineOptions o;
  o.beltrami = build_beltrami(c);
  o.continuation = build_continuation(c);
  o.boundary_samples = c.integer("boundary.samples", o.boundary_samples);
  o.weak_trials = c.integer("solver.weak_trials", o.weak_trials);
  o.weak_quadrature = c.integer("solver.weak_quadrature", o.weak_quadrature);
  return o;
}

ScalarField build_multiplier(const Config& c, const DiskGrid& grid) {
  const std::string type = c.get("multiplier.type", "constant");
  if (type == "constant") return ScalarField(grid, c.number("multiplier.value", 1.0));
  if (type == "file") {
    ScalarField h = ScalarField::load_csv(c.resolve_path(c.require("multiplier.path")));
    if (!(h.grid() == grid)) throw ConfigError("multiplier grid does not match solver.n_r/n_theta");
    return h;
  }
  throw ConfigError("unknown multiplier.type " + type);
}

}  // namespace semilin
