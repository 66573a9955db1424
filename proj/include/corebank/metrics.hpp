#pragma once

#include <cstdint>
#include <span>

namespace corebank {

// Mann–Whitney AUROC: P(score of a random positive > score of a random
// negative), ties counting one half. Needs both classes present.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Step-wise area under the precision–recall curve. Tied scores form one
// operating point; each recall step is weighted by the precision envelope
// (best precision at that recall or beyond). Needs at least one positive.
double aupr(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace corebank
