#pragma once

#include <cstddef>
#include <functional>

namespace hetlab {

/// Execution policy for the data-parallel kernels. Serial is the reference
/// implementation; Parallel must produce bit-identical results.
enum class Exec { Serial, Parallel };

/// Thread bound: HETLAB_THREADS if set and positive, else the OpenMP default.
int max_threads();

/// Calls f(i) for i in [0, n). Each index is independent; exceptions thrown by
/// any f(i) are rethrown on the caller's thread (the lowest index wins).
void for_each_index(Exec exec, std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace hetlab
