#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace trek {

/// Confidence thresholds 0.50, 0.55, ..., 0.95.
const std::array<double, 10>& mra_thresholds();

/// Mean relative accuracy: fraction of thresholds theta with
/// |pred - truth| / truth < 1 - theta. A relative error within 1e-12 of a
/// threshold's bound counts as reaching it (not below). Throws InvalidTruth.
double mra(double prediction, double truth);

/// Leading option letter (A-D) followed by end of text or a separator.
std::optional<char> option_letter(std::string_view answer);

/// 1 on case-insensitive, trimmed equality or matching option letters.
int mca_accuracy(std::string_view prediction, std::string_view truth);

}  // namespace trek
