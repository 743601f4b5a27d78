#pragma once

#include <cstddef>
#include <functional>

namespace decoup {

/// Fixed chunk length for every reduction over lattice points.
inline constexpr std::size_t kReduceChunk = 4096;

/// Worker count: DECOUP_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Calls body(chunk, begin, end) for each of the ceil(n / chunk_len) chunks,
/// spread over thread_count() workers. Chunk boundaries depend only on n and
/// chunk_len, so per-chunk results combined in chunk order are independent of
/// the worker count. The first exception thrown by a body is rethrown.
void parallel_chunks(std::size_t n, std::size_t chunk_len,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& body);

}  // namespace decoup
