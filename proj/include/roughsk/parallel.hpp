#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace roughsk {

/// Worker count: hardware concurrency, capped by the ROUGHSK_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs fn(0..n-1) on worker_count() threads. Once a job throws, no new jobs
/// start, and the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace roughsk
