#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsde/errors.hpp"

namespace dsde {

// Recursive pairwise summation; the fixed split pattern makes accumulation
// order independent of callers and cheap to reproduce in oracles.
double pairwise_sum(std::span<const double> values);

// sqrt(mean of squared differences); LengthMismatch on unequal/empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);

// Area under the ROC curve via the rank statistic with midrank tie handling;
// equals the pairwise P(score_pos > score_neg) + P(=)/2 statistic exactly.
// Throws SingleClass unless both labels occur.
double rocauc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace dsde
