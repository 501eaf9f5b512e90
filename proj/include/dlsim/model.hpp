#pragma once

#include <utility>
#include <vector>

#include "dlsim/params.hpp"
#include "dlsim/task.hpp"

namespace dlsim {

// Multinomial softmax regression. The parameter vector is a C x (p+1) weight
// matrix flattened row-major; the last column multiplies a constant-1 feature.
inline int model_dim(int num_classes, int feature_dim) {
  return num_classes * (feature_dim + 1);
}

// Mean cross-entropy over the given samples.
double cross_entropy_loss(const ParamVector& theta, int num_classes,
                          const std::vector<Sample>& samples);

// Analytic gradient of cross_entropy_loss with respect to theta.
ParamVector softmax_gradient(const ParamVector& theta, int num_classes,
                             const std::vector<Sample>& samples);

// Fraction of samples whose argmax class score matches the label. Score ties
// resolve to the lowest class index, so the all-zero model scores exactly the
// share of class 0.
double evaluate_accuracy(const ParamVector& theta, int num_classes,
                         const std::vector<Sample>& samples);

struct MomentumState {
  ParamVector buffer;  // running momentum
  double alpha = 0.9;
  double eta = 0.01;
};

// One local training half-step:
//   m' = (1 - alpha) * m + alpha * grad(theta; batch)
//   half = theta - eta * m'
std::pair<ParamVector, MomentumState> local_half_step(
    const ParamVector& theta, const MomentumState& mom, int num_classes,
    const std::vector<Sample>& batch);

}  // namespace dlsim
