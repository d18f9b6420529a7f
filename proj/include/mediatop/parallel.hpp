#ifndef MEDIATOP_PARALLEL_HPP
#define MEDIATOP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace mediatop {

/// Worker count: MEDIATOP_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// handled by exactly one worker, so bodies that only write slot i produce
/// results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mediatop

#endif  // MEDIATOP_PARALLEL_HPP
