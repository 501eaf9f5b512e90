#pragma once

#include <cstdint>
#include <vector>

namespace dlsim {

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// A synthetic classification task: a Gaussian cloud per class around a
// distinct mean, plus a held-out test set drawn from the same mixture.
struct Task {
  std::vector<Sample> train_samples;
  std::vector<Sample> test_samples;
  int num_classes = 0;
  int feature_dim = 0;
};

// Builds a Gaussian-mixture task. Class means are directions of norm
// `mean_radius` drawn deterministically from the seed; `spread` is the
// per-class cloud sigma. Same arguments always produce a bit-identical task.
Task make_synthetic_task(std::uint64_t seed, int num_classes, int feature_dim,
                         int samples_per_class, double spread,
                         int test_samples_per_class = -1, double mean_radius = 2.0);

// Splits the train set into per-user shards of contiguous class ranges
// (non-IID). The first (num_classes % num_users) users receive one extra
// class. Every shard keeps the full test set and the global label space.
std::vector<Task> partition_by_class(const Task& task, int num_users);

}  // namespace dlsim
