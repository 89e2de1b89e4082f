#include "alloc_hook.hpp"

#include <atomic>
#include <cstdlib>

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
}

namespace {

std::atomic<bool> tracking{false};
std::atomic<std::size_t> peak_request{0};

void note(std::size_t bytes) {
  if (!tracking.load(std::memory_order_relaxed)) return;
  std::size_t cur = peak_request.load(std::memory_order_relaxed);
  while (bytes > cur && !peak_request.compare_exchange_weak(cur, bytes, std::memory_order_relaxed)) {
  }
}

}  // namespace

extern "C" {

void* malloc(std::size_t n) {
  note(n);
  return __libc_malloc(n);
}

void* calloc(std::size_t count, std::size_t n) {
  note(count * n);
  return __libc_calloc(count, n);
}

void* realloc(void* p, std::size_t n) {
  note(n);
  return __libc_realloc(p, n);
}

}  // extern "C"

namespace alloc_hook {

void start() {
  peak_request.store(0);
  tracking.store(true);
}

void stop() { tracking.store(false); }

std::size_t largest() { return peak_request.load(); }

}  // namespace alloc_hook
