#include "dsde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsde {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw LengthMismatch("rmse needs equal-length nonempty sequences");
    std::vector<double> sq(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - truth[i];
        sq[i] = diff * diff;
    }
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(pred.size()));
}

double rocauc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw LengthMismatch("rocauc needs aligned scores and labels");
    std::size_t n_pos = 0;
    for (auto l : labels) n_pos += l ? 1 : 0;
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw SingleClass("rocauc needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tie groups; rank sum of the positive class
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t q = i; q <= j; ++q)
            if (labels[order[q]]) rank_sum += midrank;
        i = j + 1;
    }
    const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace dsde
