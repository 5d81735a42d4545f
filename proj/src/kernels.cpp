#include "varifold_lab/kernels.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "varifold_lab/core.hpp"

namespace vl {

namespace {
std::atomic<ExecPolicy> g_policy{ExecPolicy::Parallel};
}

void set_exec_policy(ExecPolicy p) { g_policy.store(p); }
ExecPolicy exec_policy() { return g_policy.load(); }

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, ExecPolicy p) {
  const long long N = static_cast<long long>(n);
  if (p == ExecPolicy::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < N; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (long long i = 0; i < N; ++i) body(static_cast<std::size_t>(i));
  }
}

double reduce_terms(std::size_t n, const std::function<double(std::size_t)>& term, ExecPolicy p) {
  std::vector<double> buf(n);
  for_each_index(n, [&](std::size_t i) { buf[i] = term(i); }, p);
  KahanSum s;
  for (double v : buf) s.add(v);
  return s.sum;
}

double reduce_terms(std::size_t n, const std::function<double(std::size_t)>& term) {
  return reduce_terms(n, term, exec_policy());
}

double reduce_max(std::size_t n, const std::function<double(std::size_t)>& term, ExecPolicy p) {
  std::vector<double> buf(n);
  for_each_index(n, [&](std::size_t i) { buf[i] = term(i); }, p);
  double best = -std::numeric_limits<double>::infinity();
  for (double v : buf) best = std::max(best, v);
  return best;
}

}  // namespace vl
