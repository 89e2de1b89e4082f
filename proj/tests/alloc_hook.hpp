#pragma once

// Allocation accounting for memory-contract tests. Linking alloc_hook.cpp
// into a binary replaces malloc, calloc and realloc with versions that record
// the largest single request while tracking is on.

#include <cstddef>

namespace alloc_hook {

void start();
void stop();
/// Largest request (bytes) seen since the last start().
std::size_t largest();

}  // namespace alloc_hook
