#pragma once

#include <cstddef>
#include <functional>

namespace nordlimit {

// Worker count used by pointwise loops. Defaults to 1; set once by the CLI.
void setThreadCount(unsigned n);
unsigned threadCount();

// Calls body(begin, end) on contiguous chunks of [0, n). Each index is
// visited exactly once, so loops writing out[i] are deterministic.
void parallelFor(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Runs task(0) .. task(n-1) on up to threadCount() workers; loops inside a task run serially.
void runTasks(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace nordlimit
