#pragma once

#include <cstddef>

namespace xai {

// Process-wide switch between the OpenMP kernels and the serial reference
// path. Results are identical either way: loop bodies write to disjoint
// slots and reductions run in index order after the parallel region.
void set_parallel(bool enabled);
bool parallel_enabled();

namespace detail {
void parallel_for_impl(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    detail::parallel_for_impl(n, &fn, [](void* ctx, std::size_t i) {
        (*static_cast<Fn*>(ctx))(i);
    });
}

}  // namespace xai
