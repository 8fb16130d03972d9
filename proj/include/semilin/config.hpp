#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "semilin/beltrami.hpp"
#include "semilin/fields.hpp"
#include "semilin/geometry.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/semilinear.hpp"

namespace semilin {

// INI-style configuration keyed by "section.key".
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text);
  void save(const std::string& path) const;

  // "section.key=value".
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool has_section(const std::string& section) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double require_number(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const;

  // Every key must be known; paths are resolved against this directory.
  void validate() const;
  std::string resolve_path(const std::string& p) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_ = ".";
};

JordanDomain build_domain(const Config& c);
MatrixFn build_matrix(const Config& c);
// Boundary data as a function of the curve parameter s in [0, 1).
std::function<double(double)> build_boundary(const Config& c);
Nonlinearity build_nonlinearity(const Config& c);
ContinuationOptions build_continuation(const Config& c);
BeltramiOptions build_beltrami(const Config& c);
PipelineOptions build_pipeline(const Config& c);
DiskGrid build_disk_grid(const Config& c);
ScalarField build_multiplier(const Config& c, const DiskGrid& grid);

}  // namespace semilin
