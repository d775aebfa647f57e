#ifndef PARSIMIX_PARALLEL_HPP_
#define PARSIMIX_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace parsimix {

// Worker cap: PARSIMIX_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t max_threads();

// Calls fn(i) for i in [0, n) on up to max_threads() threads. Each index
// is visited exactly once; fn must not throw and must only write state
// owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace parsimix

#endif  // PARSIMIX_PARALLEL_HPP_
