#include "dlsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlsim {

namespace {

void check_theta(const ParamVector& theta, int num_classes, int feature_dim) {
  if (static_cast<int>(theta.size()) != model_dim(num_classes, feature_dim)) {
    throw std::invalid_argument("model: theta has dimension " + std::to_string(theta.size()) +
                                ", expected " +
                                std::to_string(model_dim(num_classes, feature_dim)));
  }
}

// Per-class scores for one sample; row c of theta is [w_c | bias_c].
void scores(const ParamVector& theta, int num_classes, const Sample& s,
            std::vector<double>& out) {
  const int p = static_cast<int>(s.x.size());
  out.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const int row = c * (p + 1);
    double v = theta[row + p];  // constant-1 feature
    for (int f = 0; f < p; ++f) v += theta[row + f] * s.x[f];
    out[c] = v;
  }
}

}  // namespace

double cross_entropy_loss(const ParamVector& theta, int num_classes,
                          const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("cross_entropy_loss: empty sample set");
  check_theta(theta, num_classes, static_cast<int>(samples.front().x.size()));

  double total = 0.0;
  std::vector<double> s;
  for (const Sample& sample : samples) {
    scores(theta, num_classes, sample, s);
    const double m = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - m);
    total += m + std::log(sum) - s[sample.label];
  }
  return total / static_cast<double>(samples.size());
}

ParamVector softmax_gradient(const ParamVector& theta, int num_classes,
                             const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("softmax_gradient: empty sample set");
  const int p = static_cast<int>(samples.front().x.size());
  check_theta(theta, num_classes, p);

  ParamVector grad(theta.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  std::vector<double> s;
  for (const Sample& sample : samples) {
    scores(theta, num_classes, sample, s);
    const double m = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double& v : s) {
      v = std::exp(v - m);
      sum += v;
    }
    for (int c = 0; c < num_classes; ++c) {
      const double residual = (s[c] / sum - (sample.label == c ? 1.0 : 0.0)) * inv_n;
      const int row = c * (p + 1);
      for (int f = 0; f < p; ++f) grad[row + f] += residual * sample.x[f];
      grad[row + p] += residual;
    }
  }
  return grad;
}

double evaluate_accuracy(const ParamVector& theta, int num_classes,
                         const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate_accuracy: empty sample set");
  const int p = static_cast<int>(samples.front().x.size());
  check_theta(theta, num_classes, p);

  int correct = 0;
  std::vector<double> s;
  for (const Sample& sample : samples) {
    scores(theta, num_classes, sample, s);
    int best = 0;  // ties resolve to the lowest class index
    for (int c = 1; c < num_classes; ++c) {
      if (s[c] > s[best]) best = c;
    }
    if (best == sample.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

std::pair<ParamVector, MomentumState> local_half_step(
    const ParamVector& theta, const MomentumState& mom, int num_classes,
    const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::invalid_argument("local_half_step: empty batch");
  if (mom.buffer.size() != theta.size()) {
    throw std::invalid_argument("local_half_step: momentum dimension mismatch");
  }

  MomentumState next = mom;
  const ParamVector grad = softmax_gradient(theta, num_classes, batch);
  next.buffer *= (1.0 - mom.alpha);
  next.buffer.axpy(mom.alpha, grad);

  ParamVector half = theta;
  half.axpy(-mom.eta, next.buffer);
  return {std::move(half), std::move(next)};
}

}  // namespace dlsim
