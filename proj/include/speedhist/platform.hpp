#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace speedhist {

/// Keeps freed training buffers inside the process instead of returning them
/// to the kernel after every step. Only affects glibc; a no-op elsewhere.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
  mallopt(M_TOP_PAD, 256 << 20);
#endif
}

}  // namespace speedhist
