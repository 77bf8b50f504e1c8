#pragma once

#include <cstddef>
#include <functional>

namespace emrec {

// Runs fn(i) for every i in [0, n). fn(i) must touch only state owned by
// index i; under that contract the result is identical for any worker
// count, so jobs=1 and jobs=k produce the same bytes.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace emrec
