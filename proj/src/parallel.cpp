#include "nordlimit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nordlimit {

namespace {
std::atomic<unsigned> gThreads{1};
thread_local bool tNested = false;
}

void setThreadCount(unsigned n) { gThreads = std::max(1u, n); }
unsigned threadCount() { return gThreads; }

void parallelFor(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned nt =
      tNested ? 1u : std::min<std::size_t>(gThreads.load(), std::max<std::size_t>(1, n / 4096));
  if (nt <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex errMutex;
  const std::size_t chunk = (n + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    const std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      tNested = true;
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lk(errMutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

void runTasks(std::size_t n, const std::function<void(std::size_t)>& task) {
  const unsigned nt = tNested ? 1u : std::min<std::size_t>(gThreads.load(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex errMutex;
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      tNested = true;
      for (std::size_t i; (i = next++) < n;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(errMutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace nordlimit
