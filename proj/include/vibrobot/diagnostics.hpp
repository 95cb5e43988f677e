#pragma once

#include <cstdint>

namespace vibrobot {

/// Largest elementwise relative error between the tuner's analytic weight
/// gradient and a central difference of 1/2 (y_d - y)^2, where y = J u and
/// u = u0 + s . o(w) is a frozen linear surrogate for the PID law.
double tuner_gradient_check(std::uint64_t seed, double step = 1e-6);

/// Relative error between Identifier::jacobian() and a central difference of
/// predict() with respect to u(k-1), for a randomly initialised identifier.
double identifier_jacobian_check(std::uint64_t seed, double step = 1e-6);

struct IdentDemoResult {
  double jacobian = 0.0;   // J_m after training
  double mse_ratio = 0.0;  // prediction MSE / signal power over the last `window` steps
};

/// Trains an identifier online on y(k) = gain * u(k-1) with u uniform on [-1, 1].
IdentDemoResult identifier_linear_demo(std::uint64_t seed, int steps = 5000, double eta = 0.01,
                                       double gain = 0.5, int hidden = 8, int window = 500);

}  // namespace vibrobot
