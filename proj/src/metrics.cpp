#include "corebank/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "corebank/error.hpp"

namespace corebank {

namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw InvalidInput("scores and labels differ in length");
    for (auto l : labels)
        if (l > 1) throw InvalidInput("labels must be 0 or 1");
}

// Indices ordered by descending score.
std::vector<std::size_t> by_score_desc(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_inputs(scores, labels);
    const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double negatives = static_cast<double>(labels.size()) - positives;
    if (positives == 0 || negatives == 0)
        throw InvalidInput("AUROC needs both positive and negative labels");

    // Walk tie groups from the top: each positive in a group beats every
    // negative below it and ties with the negatives inside the group.
    const auto order = by_score_desc(scores);
    double wins = 0.0;
    double negatives_below = negatives;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double pos = 0.0;
        double neg = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? pos : neg) += 1.0;
            ++j;
        }
        negatives_below -= neg;
        wins += pos * (negatives_below + 0.5 * neg);
        i = j;
    }
    return wins / (positives * negatives);
}

double aupr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_inputs(scores, labels);
    const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0) throw InvalidInput("AUPR needs at least one positive label");

    const auto order = by_score_desc(scores);
    std::vector<double> recall;
    std::vector<double> precision;
    double tp = 0.0;
    double seen = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += labels[order[j]];
            seen += 1.0;
            ++j;
        }
        recall.push_back(tp / positives);
        precision.push_back(tp / seen);
        i = j;
    }
    // Precision envelope: best precision at this recall or any higher one.
    for (std::size_t k = precision.size(); k-- > 1;)
        precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double area = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
        area += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return area;
}

}  // namespace corebank
