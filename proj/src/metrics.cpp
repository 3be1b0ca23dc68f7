#include "trek/metrics.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "trek/error.hpp"

namespace trek {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string fold(std::string_view s) {
  std::string out(trim(s));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

const std::array<double, 10>& mra_thresholds() {
  static const std::array<double, 10> thresholds = [] {
    std::array<double, 10> t{};
    for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = (50 + 5 * i) / 100.0;
    return t;
  }();
  return thresholds;
}

double mra(double prediction, double truth) {
  if (!(truth > 0.0)) throw Error(ErrorKind::InvalidTruth, "ground truth must be positive");
  const double rel = std::abs(prediction - truth) / truth;
  int hits = 0;
  for (int i = 0; i < 10; ++i) {
    // 1 - theta computed from integers: (50 - 5i) / 100
    const double bound = (50 - 5 * i) / 100.0;
    if (rel < bound - kBoundaryTolerance) ++hits;
  }
  return hits / 10.0;
}

std::optional<char> option_letter(std::string_view answer) {
  answer = trim(answer);
  if (answer.empty()) return std::nullopt;
  const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(answer.front())));
  if (c < 'A' || c > 'D') return std::nullopt;
  if (answer.size() == 1) return c;
  const char next = answer[1];
  if (next == '.' || next == ')' || next == ':' || next == ',' || std::isspace(static_cast<unsigned char>(next))) {
    return c;
  }
  return std::nullopt;
}

int mca_accuracy(std::string_view prediction, std::string_view truth) {
  if (fold(prediction) == fold(truth)) return 1;
  const auto p = option_letter(prediction);
  const auto t = option_letter(truth);
  return (p && t && *p == *t) ? 1 : 0;
}

}  // namespace trek
