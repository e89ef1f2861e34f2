#pragma once

#include <cstddef>
#include <functional>

namespace engage {

//! Runs body(i) for i in [0, n).  With jobs > 1 the indices are distributed
//! over worker threads; results must be written to disjoint slots so the
//! outcome is identical for every job count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace engage
