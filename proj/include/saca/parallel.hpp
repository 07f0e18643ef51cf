#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace saca {

inline unsigned resolve_threads(unsigned requested)
{
  if (requested > 0) return requested;
  unsigned const hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, count) into contiguous chunks, one per worker, and calls
/// fn(begin, end, worker). Chunk boundaries never affect results as long as
/// fn writes only to its own slots.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn &&fn)
{
  unsigned const workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    std::size_t const chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      std::size_t const begin = std::min(count, w * chunk);
      std::size_t const end = std::min(count, begin + chunk);
      pool.emplace_back([&, begin, end, w] {
        try {
          fn(begin, end, w);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

} // namespace saca
