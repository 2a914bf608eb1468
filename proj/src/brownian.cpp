#include "dsde/brownian.hpp"

#include <cmath>
#include <string>

#include "dsde/rng.hpp"

namespace dsde {

BrownianIncrements sample_brownian(const TimeGrid& grid, int dim, std::uint64_t seed,
                                   std::uint64_t stream_id) {
    BrownianIncrements inc;
    inc.seed = seed;
    inc.steps = grid.step_count;
    inc.dim = dim;
    inc.dt = grid.dt;
    inc.data.resize(static_cast<std::size_t>(inc.steps) * dim);
    Rng rng(seed, stream_id);
    const double scale = std::sqrt(grid.dt);
    for (auto& v : inc.data) v = scale * rng.normal();
    return inc;
}

BrownianIncrements aggregate_increments(const BrownianIncrements& fine, long kappa) {
    if (kappa < 1) throw NotDivisible("kappa must be >= 1");
    if (fine.steps % kappa != 0)
        throw NotDivisible("step count " + std::to_string(fine.steps) +
                           " not divisible by kappa " + std::to_string(kappa));
    BrownianIncrements coarse;
    coarse.seed = fine.seed;
    coarse.steps = fine.steps / kappa;
    coarse.dim = fine.dim;
    coarse.dt = fine.dt * static_cast<double>(kappa);
    coarse.data.assign(static_cast<std::size_t>(coarse.steps) * fine.dim, 0.0);
    for (long kc = 0; kc < coarse.steps; ++kc)
        for (long kf = kc * kappa; kf < (kc + 1) * kappa; ++kf)
            for (int j = 0; j < fine.dim; ++j)
                coarse.data[static_cast<std::size_t>(kc) * fine.dim + j] +=
                    fine.data[static_cast<std::size_t>(kf) * fine.dim + j];
    return coarse;
}

}  // namespace dsde
