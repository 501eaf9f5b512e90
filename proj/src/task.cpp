#include "dlsim/task.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dlsim/rng.hpp"

namespace dlsim {

namespace {

std::vector<std::vector<double>> class_means(std::uint64_t seed, int num_classes,
                                             int feature_dim, double radius) {
  std::vector<std::vector<double>> means(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    RandomStream stream(seed, StreamPurpose::class_means, static_cast<std::uint64_t>(c));
    std::vector<double> dir(feature_dim);
    double sq = 0.0;
    for (int f = 0; f < feature_dim; ++f) {
      dir[f] = stream.normal();
      sq += dir[f] * dir[f];
    }
    const double scale = radius / std::sqrt(sq);
    for (double& v : dir) v *= scale;
    means[c] = std::move(dir);
  }
  return means;
}

std::vector<Sample> draw_split(std::uint64_t seed, StreamPurpose purpose,
                               const std::vector<std::vector<double>>& means,
                               int per_class, double spread, int feature_dim) {
  std::vector<Sample> out;
  out.reserve(means.size() * static_cast<std::size_t>(per_class));
  for (int c = 0; c < static_cast<int>(means.size()); ++c) {
    RandomStream stream(seed, purpose, static_cast<std::uint64_t>(c));
    for (int s = 0; s < per_class; ++s) {
      Sample sample;
      sample.label = c;
      sample.x.resize(feature_dim);
      for (int f = 0; f < feature_dim; ++f) {
        sample.x[f] = means[c][f] + spread * stream.normal();
      }
      out.push_back(std::move(sample));
    }
  }
  return out;
}

}  // namespace

Task make_synthetic_task(std::uint64_t seed, int num_classes, int feature_dim,
                         int samples_per_class, double spread,
                         int test_samples_per_class, double mean_radius) {
  if (num_classes < 2) throw std::invalid_argument("make_synthetic_task: num_classes must be >= 2");
  if (feature_dim < 2) throw std::invalid_argument("make_synthetic_task: feature_dim must be >= 2");
  if (samples_per_class < 10) {
    throw std::invalid_argument("make_synthetic_task: samples_per_class must be >= 10");
  }
  if (!(spread > 0.0)) throw std::invalid_argument("make_synthetic_task: spread must be > 0");
  if (!(mean_radius > 0.0)) {
    throw std::invalid_argument("make_synthetic_task: mean_radius must be > 0");
  }
  if (test_samples_per_class < 0) test_samples_per_class = samples_per_class;

  const auto means = class_means(seed, num_classes, feature_dim, mean_radius);

  Task task;
  task.num_classes = num_classes;
  task.feature_dim = feature_dim;
  task.train_samples = draw_split(seed, StreamPurpose::train_samples, means,
                                  samples_per_class, spread, feature_dim);
  task.test_samples = draw_split(seed, StreamPurpose::test_samples, means,
                                 test_samples_per_class, spread, feature_dim);
  return task;
}

std::vector<Task> partition_by_class(const Task& task, int num_users) {
  if (num_users <= 0) throw std::invalid_argument("partition_by_class: num_users must be > 0");
  if (num_users > task.num_classes) {
    throw std::invalid_argument("partition_by_class: num_users (" + std::to_string(num_users) +
                                ") exceeds num_classes (" + std::to_string(task.num_classes) +
                                ")");
  }

  // Contiguous class ranges; the first (C mod U) users take one extra class.
  const int base = task.num_classes / num_users;
  const int extra = task.num_classes % num_users;
  std::vector<Task> shards(num_users);
  int next_class = 0;
  for (int u = 0; u < num_users; ++u) {
    const int count = base + (u < extra ? 1 : 0);
    const int lo = next_class;
    const int hi = next_class + count;  // exclusive
    next_class = hi;

    Task& shard = shards[u];
    shard.num_classes = task.num_classes;
    shard.feature_dim = task.feature_dim;
    shard.test_samples = task.test_samples;
    for (const Sample& s : task.train_samples) {
      if (s.label >= lo && s.label < hi) shard.train_samples.push_back(s);
    }
  }
  return shards;
}

}  // namespace dlsim
