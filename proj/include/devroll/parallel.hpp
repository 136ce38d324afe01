// devroll - index-parallel loops
//
// Every embarrassingly parallel kernel in the engine (grid cells, homotopy slices,
// coverage probes) runs through for_each_index. Results are written by index, so the
// parallel and serial paths produce identical output; the serial path is kept as the
// reference implementation for tests and benchmarks.

#ifndef DEVROLL_PARALLEL_HPP
#define DEVROLL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace devroll {

enum class Exec { serial, parallel };

// Thread cap: DEVROLL_THREADS when set to a positive integer, else the OpenMP default.
int thread_count();

// Calls fn(i) for i in [0, count). The first exception (lowest index) is rethrown
// after all iterations finish.
void for_each_index(std::size_t count, Exec exec, const std::function<void(std::size_t)>& fn);

}  // namespace devroll

#endif  // DEVROLL_PARALLEL_HPP
