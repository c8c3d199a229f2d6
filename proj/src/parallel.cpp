#include "hetlab/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <omp.h>

namespace hetlab {

int max_threads() {
  if (const char* env = std::getenv("HETLAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // ignore garbage, fall back to the runtime default
    }
  }
  return omp_get_max_threads();
}

void for_each_index(Exec exec, std::size_t n, const std::function<void(std::size_t)>& f) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads())
  for (long long i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hetlab
