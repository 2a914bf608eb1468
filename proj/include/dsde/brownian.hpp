#pragma once

#include <cstdint>
#include <vector>

#include "dsde/grid.hpp"

namespace dsde {

// Increments dW^j(t_k) = W^j(t_k) - W^j(t_{k-1}) ~ N(0, dt), for steps
// k = 1..K and coordinates j = 0..dim-1. W(s) = 0 for s <= 0: no noise
// enters the initial segment.
struct BrownianIncrements {
    std::uint64_t seed = 0;
    long steps = 0;  // K
    int dim = 0;
    double dt = 0.0;
    std::vector<double> data;  // steps x dim, step-major

    double at(long k, int j) const {
        return data[static_cast<std::size_t>(k - 1) * dim + j];
    }
};

// Draws K*dim i.i.d. N(0, dt) increments from the stream (seed, stream_id).
// Same (seed, stream_id) => bit-identical output.
BrownianIncrements sample_brownian(const TimeGrid& grid, int dim, std::uint64_t seed,
                                   std::uint64_t stream_id = 0);

// Sums fine increments in groups of kappa: coarse step k' covers fine steps
// (k'-1)*kappa+1 .. k'*kappa, and coarse dt = kappa * fine dt. Throws
// NotDivisible unless kappa divides the fine step count.
BrownianIncrements aggregate_increments(const BrownianIncrements& fine, long kappa);

}  // namespace dsde
