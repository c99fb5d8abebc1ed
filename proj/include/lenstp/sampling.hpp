#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lenstp/core.hpp"

namespace lenstp {

/// Halton radical-inverse in the given base.
double halton(std::uint64_t index, int base);

/// Deterministic low-discrepancy sample of S^{2n-1}: Halton points in
/// [0,1)^{2n} pushed through Box-Muller pairs and normalized. The seed
/// offsets the Halton index so distinct seeds give distinct (but still
/// reproducible) samples.
std::vector<CVec> sphere_sample(int n, int count, std::uint64_t seed);

/// Midpoint grid on [0,1).
std::vector<double> tau_grid(int count);

/// Runs body(i) for i in [0, count) on the requested number of threads.
/// Work is claimed by atomic counter but results must be written to
/// per-index slots by the caller, so the outcome is schedule-independent.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

} // namespace lenstp
