#pragma once

#include <algorithm>
#include <stdexcept>

namespace vkctrl {

/// Box constraints u_a <= u <= u_b and Tikhonov weight alpha.
struct Bounds {
  double u_a = 0.0;
  double u_b = 0.0;
  double alpha = 1.0;

  void validate() const {
    if (!(u_a <= u_b)) throw std::invalid_argument("bounds: require u_a <= u_b");
    if (!(alpha > 0.0)) throw std::invalid_argument("bounds: require alpha > 0");
  }
  double clamp(double v) const { return std::clamp(v, u_a, u_b); }
  /// Pointwise projection formula clamp(-theta / alpha).
  double project_adjoint(double theta) const { return clamp(-theta / alpha); }
};

}  // namespace vkctrl
