#include "implcons/loss.hpp"

#include <algorithm>
#include <cmath>

#include "implcons/errors.hpp"

namespace implcons {

void LossConfig::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 0.5)");
}

double clamp_probability(double p, double epsilon) noexcept {
  return std::clamp(p, epsilon, 1.0 - epsilon);
}

double cons_loss(PropPair pair, const LossConfig& config) {
  const double p1 = clamp_probability(pair.pi1, config.epsilon);
  const double p2 = clamp_probability(pair.pi2, config.epsilon);
  // log1p keeps ln(1 - p1) accurate for small p1.
  return -(1.0 - p2) * std::log1p(-p1) - p1 * std::log(p2);
}

LossGradient cons_loss_grad(PropPair pair, const LossConfig& config) {
  const double p1 = clamp_probability(pair.pi1, config.epsilon);
  const double p2 = clamp_probability(pair.pi2, config.epsilon);
  return {(1.0 - p2) / (1.0 - p1) - std::log(p2), std::log1p(-p1) - p1 / p2};
}

double joint_loss(double vqa_loss, std::span<const PropPair> pairs, const LossConfig& config) {
  if (pairs.empty() || config.lambda == 0.0) return vqa_loss;
  double sum = 0.0;
  for (const auto& p : pairs) sum += cons_loss(p, config);
  return vqa_loss + config.lambda * sum / static_cast<double>(pairs.size());
}

}  // namespace implcons
