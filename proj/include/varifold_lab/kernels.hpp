#pragma once

#include <cstddef>
#include <functional>

namespace vl {

enum class ExecPolicy { Serial, Parallel };

void set_exec_policy(ExecPolicy p);
ExecPolicy exec_policy();
int parallel_threads();

// Sum of term(i) over [0, n). Terms are evaluated (possibly in parallel) into a
// buffer and added with a compensated sum in index order, so the result does not
// depend on the policy or the thread count.
double reduce_terms(std::size_t n, const std::function<double(std::size_t)>& term);
double reduce_terms(std::size_t n, const std::function<double(std::size_t)>& term, ExecPolicy p);

// Max of term(i); -inf for n = 0.
double reduce_max(std::size_t n, const std::function<double(std::size_t)>& term, ExecPolicy p);

// Runs body(i) for i in [0, n) under the policy; body must write only to slot i.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, ExecPolicy p);
inline void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body) {
  for_each_index(n, body, exec_policy());
}

}  // namespace vl
