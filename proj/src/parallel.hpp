#pragma once

#include <cstddef>
#include <functional>

namespace tha::detail {

/// Number of fixed chunks a reduction over `count` items is split into. Independent of the
/// thread count, so chunked sums combine in the same order however many workers run.
std::size_t chunk_count(std::size_t count);

/// Calls fn(chunk, begin, end) for every chunk of [0, count); chunks run on up to
/// thread_count() workers. The first exception thrown by any chunk is rethrown.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace tha::detail
