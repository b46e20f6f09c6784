#pragma once

#include <array>

#include "ocmc/perturbation_tensor.hpp"

namespace ocmc {

// g = (1 + |x|^-1)^4 delta + T. With `conformal` off (flat test mode) the
// conformal factor is replaced by one.
struct MetricSpec {
  TensorPtr tensor;
  bool conformal = true;
};

MetricSpec schwarzschild_metric();
MetricSpec flat_metric();
MetricSpec perturbed_metric(TensorPtr tensor);

struct MetricSample {
  Mat3 g;
  std::array<Mat3, 3> dg;  // dg[k] = partial_k g
};

// Requires |x| >= 1 (or x != 0 in flat mode). Throws kMetricDegenerate when g
// is not positive definite.
MetricSample metric_eval(const MetricSpec& m, const Vec3& x);

}  // namespace ocmc
