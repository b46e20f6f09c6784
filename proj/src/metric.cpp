#include "ocmc/metric.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "ocmc/errors.hpp"

namespace ocmc {

MetricSpec schwarzschild_metric() {
  return {std::make_shared<ZeroTensor>(), true};
}

MetricSpec flat_metric() { return {std::make_shared<ZeroTensor>(), false}; }

MetricSpec perturbed_metric(TensorPtr tensor) {
  if (!tensor) throw Error(ErrorKind::kInvalidArgument, "null tensor");
  return {std::move(tensor), true};
}

MetricSample metric_eval(const MetricSpec& m, const Vec3& x) {
  const double r = x.norm();
  if (m.conformal ? !(r >= 1.0) : !(r > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "metric evaluated at |x| = " << r;
    throw Error(ErrorKind::kDomain, os.str());
  }
  MetricSample s;
  if (m.conformal) {
    const double u = 1.0 + 1.0 / r;
    const double u3 = u * u * u;
    s.g = (u3 * u) * Mat3::Identity();
    // d/dx_k (1 + 1/r)^4 = -4 u^3 x_k / r^3
    for (int k = 0; k < 3; ++k) {
      s.dg[k] = (-4.0 * u3 * x[k] / (r * r * r)) * Mat3::Identity();
    }
  } else {
    s.g = Mat3::Identity();
    for (int k = 0; k < 3; ++k) s.dg[k] = Mat3::Zero();
  }
  if (m.tensor && !m.tensor->is_zero()) {
    const TensorJet j = m.tensor->jet(x, 1);
    s.g += j.value;
    for (int k = 0; k < 3; ++k) s.dg[k] += j.d1[k];
    Eigen::LLT<Mat3> llt(s.g);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os.precision(17);
      os << "metric not positive definite at (" << x.x() << ", " << x.y()
         << ", " << x.z() << ")";
      throw Error(ErrorKind::kMetricDegenerate, os.str());
    }
  }
  return s;
}

}  // namespace ocmc
