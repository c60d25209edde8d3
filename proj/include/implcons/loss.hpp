#pragma once

#include <span>

namespace implcons {

/// Probabilities of the sufficient (pi1) and necessary (pi2) propositions
/// of one implication arrow.
struct PropPair {
  double pi1 = 0.0;
  double pi2 = 0.0;
};

struct LossConfig {
  double lambda = 0.0;
  /// Probabilities are clamped to [epsilon, 1 - epsilon].
  double epsilon = 1e-7;

  /// Throws ValidationError unless lambda >= 0 and 0 < epsilon < 0.5.
  void validate() const;
};

struct LossGradient {
  double d_pi1 = 0.0;
  double d_pi2 = 0.0;
};

double clamp_probability(double p, double epsilon) noexcept;

/// Consistency loss of one arrow,
///
///   L = -(1 - pi2) ln(1 - pi1) - pi1 ln(pi2),
///
/// on clamped probabilities. Near zero when pi1 = 0 or pi2 = 1; grows
/// without bound (up to the clamp) as pi1 -> 1 with pi2 < 1, or as pi2 -> 0
/// with pi1 > 0.
double cons_loss(PropPair pair, const LossConfig& config);

/// Partial derivatives of cons_loss with respect to pi1 and pi2, evaluated
/// at the clamped point:
///   dL/dpi1 = (1 - pi2) / (1 - pi1) - ln(pi2)
///   dL/dpi2 = ln(1 - pi1) - pi1 / pi2
LossGradient cons_loss_grad(PropPair pair, const LossConfig& config);

/// vqa_loss + lambda * mean(cons_loss over pairs); vqa_loss when `pairs`
/// is empty.
double joint_loss(double vqa_loss, std::span<const PropPair> pairs, const LossConfig& config);

}  // namespace implcons
