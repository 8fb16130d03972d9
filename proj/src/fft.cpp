#include "semilin/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace semilin::fft {

namespace {

using Key = std::tuple<int, int, int, int>;  // rank-tagged n0, n1/howmany, sign, kind

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::map<Key, fftw_plan>& cache() {
  static std::map<Key, fftw_plan> c;
  return c;
}

fftw_plan plan_1d(int n, int howmany, int sign) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  Key key{n, howmany, sign, 1};
  auto it = cache().find(key);
  if (it != cache().end()) return it->second;
  std::vector<fftw_complex> tmp(static_cast<std::size_t>(n) * howmany);
  fftw_plan p = fftw_plan_many_dft(1, &n, howmany, tmp.data(), nullptr, 1, n, tmp.data(), nullptr,
                                   1, n, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache().emplace(key, p);
  return p;
}

fftw_plan plan_2d(int n0, int n1, int sign) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  Key key{n0, n1, sign, 2};
  auto it = cache().find(key);
  if (it != cache().end()) return it->second;
  std::vector<fftw_complex> tmp(static_cast<std::size_t>(n0) * n1);
  fftw_plan p = fftw_plan_dft_2d(n0, n1, tmp.data(), tmp.data(), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache().emplace(key, p);
  return p;
}

fftw_complex* raw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void forward(cplx* data, int n, int howmany) {
  fftw_execute_dft(plan_1d(n, howmany, FFTW_FORWARD), raw(data), raw(data));
}

void backward(cplx* data, int n, int howmany) {
  fftw_execute_dft(plan_1d(n, howmany, FFTW_BACKWARD), raw(data), raw(data));
}

void forward_2d(cplx* data, int n0, int n1) {
  fftw_execute_dft(plan_2d(n0, n1, FFTW_FORWARD), raw(data), raw(data));
}

void backward_2d(cplx* data, int n0, int n1) {
  fftw_execute_dft(plan_2d(n0, n1, FFTW_BACKWARD), raw(data), raw(data));
}

}  // namespace semilin::fft
