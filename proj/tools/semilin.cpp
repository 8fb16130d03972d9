#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "semilin/beltrami.hpp"
#include "semilin/config.hpp"
#include "semilin/error.hpp"
#include "semilin/oracles.hpp"
#include "semilin/potential.hpp"
#include "semilin/semilinear.hpp"

using namespace semilin;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigExit = 1;
constexpr int kSolverExit = 2;
constexpr int kVerifyExit = 3;

struct Args {
  std::string config, out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

Config load_config(const Args& a) {
  if (a.config.empty()) throw ConfigError("--config is required");
  Config c = Config::load(a.config);
  for (const std::string& o : a.overrides) c.apply_override(o);
  if (a.has_seed) c.set("solver.seed", std::to_string(a.seed));
  c.validate();
  return c;
}

fs::path out_dir(const Args& a) {
  if (a.out.empty()) throw ConfigError("--out is required");
  fs::create_directories(a.out);
  return fs::path(a.out);
}

class KeyValues {
 public:
  void add(const std::string& k, const std::string& v) { lines_.emplace_back(k, v); }
  void add(const std::string& k, double v) { add(k, format_double(v)); }
  void add_int(const std::string& k, long long v) { add(k, std::to_string(v)); }
  void add_bool(const std::string& k, bool v) { add(k, v ? "true" : "false"); }
  void write(const fs::path& p, const std::string& tail = "") const {
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    for (const auto& [k, v] : lines_) out << k << " = " << v << "\n";
    out << tail;
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

std::map<std::string, std::string> read_key_values(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("missing artifact " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BoundaryData circle_data(const Config& c) {
  const auto phi = build_boundary(c);
  return BoundaryData::from_function(c.integer("boundary.samples", 256), [&](double t) { return phi(t / (2.0 * kPi)); });
}

void save_complex_nodes(const fs::path& p, const char* kind, const QuasiconformalMap& map,
                        const std::vector<cplx>& values) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  const CartesianGrid& g = map.grid();
  out << "# " << kind << " v1, grid=cartesian,nx=" << g.nx << ",ny=" << g.ny << ",h=" << format_double(g.h)
      << ", interior nodes only\n";
  out << "x,y,re,im\n";
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t k = g.index(ix, iy);
      if (!map.inside()[k]) continue;
      const cplx z = g.node(ix, iy);
      out << format_double(z.real()) << ',' << format_double(z.imag()) << ',' << format_double(values[k].real())
          << ',' << format_double(values[k].imag()) << '\n';
    }
}

void save_inverse(const fs::path& p, const QuasiconformalMap& map) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  const DiskGrid& g = map.disk();
  out << "# omega-inverse v1, grid=polar,n_r=" << g.n_r() << ",n_theta=" << g.n_theta() << "\n";
  out << "r,theta,re,im\n";
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const cplx z = map.inverse_samples()[g.index(i, j)];
      out << format_double(g.radius(i)) << ',' << format_double(g.angle(j)) << ',' << format_double(z.real()) << ','
          << format_double(z.imag()) << '\n';
    }
}

struct ComplexRow {
  double x, y;
  cplx v;
};

std::vector<ComplexRow> load_complex_rows(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("missing artifact " + p.string());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::vector<ComplexRow> rows;
  while (std::getline(in, line)) {
    double a, b, c, d;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &d) == 4) rows.push_back({a, b, {c, d}});
  }
  return rows;
}

void write_map_artifacts(const fs::path& dir, const QuasiconformalMap& map, const ScalarField& J) {
  save_complex_nodes(dir / "omega.csv", "omega", map, map.forward_samples());
  save_inverse(dir / "omega_inverse.csv", map);
  J.save_csv((dir / "jacobian.csv").string());
  BeltramiField mu;
  mu.grid = map.grid();
  mu.mu = map.dilatation_samples();
  mu.k_bound = map.k_measured();
  mu.save_csv((dir / "mu.csv").string());
}

int run_solve_disk(const Args& a) {
  const Config c = load_config(a);
  const fs::path dir = out_dir(a);
  const DiskGrid grid = build_disk_grid(c);
  const ScalarField h = build_multiplier(c, grid);
  const BoundaryData phi = circle_data(c);
  const Nonlinearity f = build_nonlinearity(c);
  const DiskSolution sol = solve_quasilinear_disk(h, phi, f, build_continuation(c));
  sol.U.save_csv((dir / "U.csv").string());
  sol.g.save_csv((dir / "g.csv").string());
  phi.save_csv((dir / "boundary.csv").string());
  sol.report.save_tau_trace((dir / "tau_trace.csv").string());
  KeyValues kv;
  kv.add("mode", "solve-disk");
  if (c.has("solver.dead_core_eps")) {
    const DeadCore dc = detect_dead_core(sol.U, c.require_number("solver.dead_core_eps"));
    kv.add_int("dead_core_components", dc.components);
    kv.add("dead_core_area", dc.area);
    kv.add("dead_core_radius", dc.radius);
  }
  sol.report.save((dir / "report.tmp").string());
  kv.write(dir / "report.txt", slurp(dir / "report.tmp"));
  fs::remove(dir / "report.tmp");
  c.save((dir / "config.ini").string());
  std::printf("solve-disk: converged, ||g||_p = %.6g, B = %.6g\n", sol.report.final_g_norm, sol.report.apriori_bound);
  return 0;
}

int run_solve_domain(const Args& a) {
  const Config c = load_config(a);
  const fs::path dir = out_dir(a);
  const JordanDomain domain = build_domain(c);
  const MatrixFn A = build_matrix(c);
  const auto phi = build_boundary(c);
  const Nonlinearity f = build_nonlinearity(c);
  const SemilinearResult res = solve_semilinear(domain, A, phi, f, build_pipeline(c));
  const QuasiconformalMap& map = res.u.map();
  write_map_artifacts(dir, map, jacobian_inverse(map));
  res.u.disk().U.save_csv((dir / "U.csv").string());
  res.u.disk().g.save_csv((dir / "g.csv").string());
  res.u.disk().phi.save_csv((dir / "boundary.csv").string());
  {
    const CartesianGrid& g = map.grid();
    std::vector<cplx> pts;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (map.inside()[g.index(ix, iy)]) pts.push_back(g.node(ix, iy));
    std::vector<double> v;
    std::vector<cplx> grad;
    res.u.evaluate(pts, v, grad);
    std::ofstream out(dir / "u.csv");
    out << "# domain-field v1, grid=cartesian,nx=" << g.nx << ",ny=" << g.ny << ",h=" << format_double(g.h)
        << ", interior nodes only\n";
    out << "x,y,value\n";
    for (std::size_t k = 0; k < pts.size(); ++k)
      out << format_double(pts[k].real()) << ',' << format_double(pts[k].imag()) << ',' << format_double(v[k]) << '\n';
  }
  res.report.save_tau_trace((dir / "tau_trace.csv").string());
  KeyValues kv;
  kv.add("mode", "solve-domain");
  kv.add("domain_area", domain.signed_area());
  kv.add_int("neumann_iterations", map.neumann_iterations());
  kv.add_int("theodorsen_iterations", map.theodorsen_iterations());
  kv.add("k_measured", map.k_measured());
  res.report.save((dir / "report.tmp").string());
  kv.write(dir / "report.txt", slurp(dir / "report.tmp"));
  fs::remove(dir / "report.tmp");
  c.save((dir / "config.ini").string());
  std::printf("solve-domain: converged, weak residual = %.6g\n", res.report.weak_residual);
  return 0;
}

int run_beltrami_map(const Args& a) {
  const Config c = load_config(a);
  const fs::path dir = out_dir(a);
  const JordanDomain domain = build_domain(c);
  const QuasiconformalMap map = solve_beltrami(domain, dilatation_of(build_matrix(c)), build_beltrami(c));
  const ScalarField J = jacobian_inverse(map);
  write_map_artifacts(dir, map, J);
  KeyValues kv;
  kv.add("mode", "beltrami-map");
  kv.add("domain_area", domain.signed_area());
  kv.add("jacobian_integral", J.integral());
  kv.add("jacobian_min", J.min());
  kv.add("jacobian_max", J.max());
  kv.add_int("neumann_iterations", map.neumann_iterations());
  kv.add_int("theodorsen_iterations", map.theodorsen_iterations());
  kv.add("k_measured", map.k_measured());
  try {
    const JacobianIntegrability ji = select_jacobian_p(map, c.number("solver.p", 2.0));
    kv.add("jacobian_p", ji.p);
    kv.add("jacobian_norm", ji.norm);
    kv.add("jacobian_coarse_norm", ji.coarse_norm);
  } catch (const Error& e) {
    kv.add("jacobian_p", "none");
  }
  kv.write(dir / "report.txt");
  c.save((dir / "config.ini").string());
  std::printf("beltrami-map: J integral = %.6g, domain area = %.6g\n", J.integral(), domain.signed_area());
  return 0;
}

int run_qhyp(const Args& a) {
  const Config c = load_config(a);
  const fs::path dir = out_dir(a);
  const JordanDomain domain = build_domain(c);
  const cplx z0(c.number("qhyp.x0", 0.0), c.number("qhyp.y0", 0.0));
  QhbOptions qo;
  qo.resolution = c.number("qhyp.resolution", 0.0);
  qo.metric.stencil = c.integer("qhyp.stencil", 16);
  const QhbEstimate est = estimate_qhb_constants(domain, z0, c.integer("qhyp.samples", 64), qo);
  {
    std::ofstream out(dir / "distances.csv");
    out << "x,y,k,log_ratio\n";
    for (std::size_t i = 0; i < est.samples.size(); ++i)
      out << format_double(est.samples[i].real()) << ',' << format_double(est.samples[i].imag()) << ','
          << format_double(est.k[i]) << ',' << format_double(est.log_ratio[i]) << '\n';
  }
  KeyValues kv;
  kv.add("mode", "qhyp");
  kv.add("a", est.a);
  kv.add("b", est.b);
  kv.add("max_residual", est.max_residual);
  kv.add("x0", est.base_point.real());
  kv.add("y0", est.base_point.imag());
  kv.add("resolution", est.resolution);
  kv.add_int("samples", static_cast<long long>(est.samples.size()));
  if (c.has("qhyp.targets")) {
    std::vector<double> v;
    std::string s = c.require("qhyp.targets");
    for (char& ch : s)
      if (ch == ';' || ch == ',') ch = ' ';
    std::istringstream in(s);
    double x;
    while (in >> x) v.push_back(x);
    if (v.size() % 2 != 0) throw ConfigError("qhyp.targets needs x y pairs");
    std::vector<cplx> t;
    for (std::size_t k = 0; k < v.size(); k += 2) t.emplace_back(v[k], v[k + 1]);
    const std::vector<double> d = quasihyperbolic_distances(domain, z0, t, est.resolution, qo.metric);
    for (std::size_t k = 0; k < t.size(); ++k) kv.add("target_" + std::to_string(k), d[k]);
  }
  kv.write(dir / "qhb.txt");
  c.save((dir / "config.ini").string());
  std::printf("qhyp: a = %.6g, b = %.6g\n", est.a, est.b);
  return 0;
}

class Checks {
 public:
  void expect(bool ok, const std::string& what, double value, double limit) {
    std::printf("verify: %s %s (%.6g, limit %.6g)\n", ok ? "ok  " : "FAIL", what.c_str(), value, limit);
    failed_ |= !ok;
  }
  bool failed() const { return failed_; }

 private:
  bool failed_ = false;
};

void verify_disk_solution(const fs::path& dir, const Config& c, const ScalarField& h, const BoundaryData& phi,
                          double p, Checks& chk) {
  const ScalarField U = ScalarField::load_csv((dir / "U.csv").string());
  const ScalarField g = ScalarField::load_csv((dir / "g.csv").string());
  const Nonlinearity f = build_nonlinearity(c);
  const ContinuationOptions co = build_continuation(c);
  ScalarField defect(U.grid());
  for (std::size_t k = 0; k < U.size(); ++k) defect[k] = g[k] - h[k] * f(U[k]);
  const double gap = defect.lp_norm(p), fix_tol = 100.0 * co.inner_tol * (1.0 + g.lp_norm(p));
  chk.expect(gap <= fix_tol, "fixed point g = h f(U)", gap, fix_tol);
  PoissonOptions po;
  po.consistency_tol = co.consistency_tol;
  const PoissonSolution ps = solve_poisson_dirichlet(g, phi, po);
  double d = 0.0;
  for (std::size_t k = 0; k < U.size(); ++k) d = std::max(d, std::abs(U[k] - ps.U[k]));
  chk.expect(d <= 1e-9 * (1.0 + U.sup_norm()), "U = N_g - P_{N*g} + P_phi", d, 1e-9 * (1.0 + U.sup_norm()));
  chk.expect(ps.representation_gap <= co.consistency_tol, "dual representation gap", ps.representation_gap,
             co.consistency_tol);
  if (U.grid().n_r() >= 32 && U.grid().n_theta() >= 32) {
    const double lr = laplacian_residual(U, g);
    chk.expect(lr <= 1e-2 * (1.0 + g.sup_norm()), "discrete Laplacian residual", lr, 1e-2 * (1.0 + g.sup_norm()));
  }
}

void verify_map(const fs::path& dir, const Config& c, double area, Checks& chk) {
  const ScalarField J = ScalarField::load_csv((dir / "jacobian.csv").string());
  chk.expect(J.min() > 0.0, "Jacobian positive", J.min(), 0.0);
  const double rel = std::abs(J.integral() - area) / area;
  chk.expect(rel <= 0.02, "integral of J equals domain area", rel, 0.02);
  if (c.get("matrix.type", "identity") == "radial_stretch") {
    const RadialStretch rs = radial_stretch_reference(c.number("matrix.K", 2.0));
    const DiskGrid& g = J.grid();
    double ej = 0.0;
    for (int i = 0; i < g.n_r(); ++i)
      for (int j = 0; j < g.n_theta(); ++j) {
        const cplx w = g.node(i, j);
        if (std::abs(w) < 0.05 || std::abs(w) > 0.95) continue;
        ej = std::max(ej, std::abs(J(i, j) - rs.jacobian_inverse(w)));
      }
    chk.expect(ej <= 1e-2, "J matches the radial stretch", ej, 1e-2);
    double ew = 0.0;
    for (const ComplexRow& row : load_complex_rows(dir / "omega.csv")) {
      const cplx z(row.x, row.y);
      if (std::abs(z) <= 0.9) ew = std::max(ew, std::abs(row.v - rs.omega(z)));
    }
    chk.expect(ew <= 1e-2, "omega matches the radial stretch", ew, 1e-2);
  }
}

int run_verify(const Args& a) {
  if (a.out.empty()) throw ConfigError("verify needs --out <artifact dir>");
  const fs::path dir(a.out);
  Config c = Config::load((dir / "config.ini").string());
  c.validate();
  Checks chk;
  if (fs::exists(dir / "qhb.txt")) {
    const auto kv = read_key_values(dir / "qhb.txt");
    const double A = std::stod(kv.at("a")), B = std::stod(kv.at("b")), R = std::stod(kv.at("max_residual"));
    std::ifstream in(dir / "distances.csv");
    std::string line;
    std::getline(in, line);
    double worst = -1e300;
    while (std::getline(in, line)) {
      double x, y, k, lr;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &k, &lr) != 4) continue;
      worst = std::max(worst, k - (A * lr + B + R));
    }
    chk.expect(A >= 0.0, "a nonnegative", A, 0.0);
    chk.expect(worst <= 1e-9, "k <= a ln(d0/d) + b + max_residual", worst, 1e-9);
  } else {
    const auto kv = read_key_values(dir / "report.txt");
    const std::string mode = kv.count("mode") ? kv.at("mode") : "";
    if (mode == "solve-disk") {
      const ScalarField U = ScalarField::load_csv((dir / "U.csv").string());
      verify_disk_solution(dir, c, build_multiplier(c, U.grid()), BoundaryData::load_csv((dir / "boundary.csv").string()),
                           std::stod(kv.at("p_used")), chk);
    } else if (mode == "solve-domain") {
      const ScalarField J = ScalarField::load_csv((dir / "jacobian.csv").string());
      verify_disk_solution(dir, c, J, BoundaryData::load_csv((dir / "boundary.csv").string()),
                           std::stod(kv.at("p_used")), chk);
      verify_map(dir, c, std::stod(kv.at("domain_area")), chk);
      const double wr = std::stod(kv.at("weak_residual"));
      chk.expect(wr >= 0.0 && wr <= 5e-2, "weak residual", wr, 5e-2);
    } else if (mode == "beltrami-map") {
      verify_map(dir, c, std::stod(kv.at("domain_area")), chk);
    } else {
      throw ConfigError("unknown artifact mode '" + mode + "' in " + (dir / "report.txt").string());
    }
  }
  return chk.failed() ? kVerifyExit : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semilinear elliptic solver in plane domains"};
  app.require_subcommand(1);
  Args args;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", args.config, "INI configuration file");
    if (needs_config) opt->required();
    sub->add_option("--out", args.out, "artifact directory")->required();
    sub->add_option("--override", args.overrides, "section.key=value (repeatable)");
    sub->add_option("--seed", args.seed, "random seed for probes and trials")->each([&](const std::string&) {
      args.has_seed = true;
    });
  };
  std::map<std::string, int (*)(const Args&)> modes{{"solve-disk", run_solve_disk},
                                                    {"solve-domain", run_solve_domain},
                                                    {"beltrami-map", run_beltrami_map},
                                                    {"qhyp", run_qhyp},
                                                    {"verify", run_verify}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : modes) subs[name] = app.add_subcommand(name);
  subs["solve-disk"]->description("Delta U = h f(U) in the unit disk");
  subs["solve-domain"]->description("div(A grad u) = f(u) on a Jordan domain");
  subs["beltrami-map"]->description("quasiconformal map agreed with A and its inverse Jacobian");
  subs["qhyp"]->description("quasihyperbolic distances and boundary-condition constants");
  subs["verify"]->description("recheck residuals of an artifact directory");
  for (const auto& [name, sub] : subs) add_common(sub, name != "verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) return modes.at(name)(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return kSolverExit;
  } catch (const Error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverExit;
  }
  return kConfigExit;
}
