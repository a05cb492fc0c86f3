#pragma once

#include <cmath>

namespace mia {

// Additive clamp applied before taking logs of probabilities; keeps every
// confidence transform finite at p = 0.
inline constexpr double kConfidenceEpsilon = 1e-45;

// Upper clamp for the logit transform, log(p / (1 - p)).
inline constexpr double kLogitCeiling = 1.0 - 1e-12;

// Smallest admissible Gaussian variance; degenerate fits clamp here.
inline constexpr double kVarianceFloor = 1e-12;

// Standard normal CDF, |error| < 1e-7 on [-8, 8] (Cody's rational erfc).
double normal_cdf(double z);

// erfc via Cody's near-minimax rational approximations (Math. Comp. 1969).
double erfc_cody(double x);

// log N(x; mean, variance). Stays in log space; never exponentiates.
inline double gaussian_log_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * M_PI * variance) + d * d / variance);
}

}  // namespace mia
