#include "brl/common.hpp"

#include <exception>
#include <mutex>
#include <thread>

namespace brl {

namespace {
std::atomic<int> g_threads{0};  // 0 = use hardware concurrency
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
  int n = g_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(const std::vector<double>& v) {
  // Iterative pairwise reduction; order depends only on v.size().
  if (v.empty()) return 0.0;
  std::vector<double> acc(v);
  std::size_t n = acc.size();
  while (n > 1) {
    std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) acc[i] = acc[2 * i] + acc[2 * i + 1];
    if (n % 2 == 1) {
      acc[half] = acc[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return acc[0];
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace brl
