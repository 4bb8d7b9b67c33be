#pragma once

#include <cstdint>
#include <functional>

namespace panel_logit {

/// Resolves a requested thread count: 0 means PANEL_LOGIT_THREADS, falling
/// back to the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// do not depend on the thread count.
void parallel_for_chunks(std::int64_t n, std::int64_t chunk, unsigned threads,
                         const std::function<void(std::int64_t, std::int64_t)>& body);

}  // namespace panel_logit
