#include "dlsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dlsim/aggregators.hpp"
#include "dlsim/rng.hpp"

namespace dlsim {

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::honest: return "honest";
    case AttackKind::state_override: return "state_override";
    case AttackKind::state_override_clip_aware: return "state_override_clip_aware";
    case AttackKind::sandtrap: return "sandtrap";
    case AttackKind::dissensus: return "dissensus";
    case AttackKind::noisy: return "noisy";
  }
  return "?";
}

std::optional<AttackKind> attack_kind_from_string(const std::string& name) {
  for (AttackKind k : {AttackKind::honest, AttackKind::state_override,
                       AttackKind::state_override_clip_aware, AttackKind::sandtrap,
                       AttackKind::dissensus, AttackKind::noisy}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

// Honest receivers of the adversary's updates: honest nodes i with W_ib > 0.
std::vector<int> honest_receivers(const OmniscientView& view) {
  std::vector<int> out;
  for (int i : view.honest_set) {
    if (view.mixing->at(i, view.byz_index) > 0.0) out.push_back(i);
  }
  if (out.empty()) {
    throw std::invalid_argument("attack: the byzantine node has no honest neighbor");
  }
  return out;
}

const ParamVector& half_step(const OmniscientView& view, int node) {
  const auto it = view.honest_half_steps.find(node);
  if (it == view.honest_half_steps.end()) {
    throw std::invalid_argument("attack: missing half-step for honest node " +
                                std::to_string(node));
  }
  return it->second;
}

// sum over honest j of W_ij * theta_j; W_ij = 0 covers non-neighbors.
ParamVector honest_contribution(const OmniscientView& view, int i,
                                int excluded = -1) {
  ParamVector acc(half_step(view, view.honest_set.front()).size(), 0.0);
  for (int j : view.honest_set) {
    if (j == excluded) continue;
    const double w = view.mixing->at(i, j);
    if (w == 0.0) continue;
    acc.axpy(w, half_step(view, j));
  }
  return acc;
}

double receiver_tau(const OmniscientView& view, int i) {
  const auto it = view.receiver_tau.find(i);
  if (it == view.receiver_tau.end()) {
    throw std::invalid_argument("attack: no clipping radius known for receiver " +
                                std::to_string(i));
  }
  return it->second;
}

}  // namespace

std::map<int, ParamVector> attack_state_override(const OmniscientView& view,
                                                 const AttackSpec& spec) {
  std::map<int, ParamVector> out;
  for (int i : honest_receivers(view)) {
    const double w_ib = view.mixing->at(i, view.byz_index);
    ParamVector u = spec.target_model - honest_contribution(view, i);
    u /= w_ib;
    out.emplace(i, std::move(u));
  }
  return out;
}

std::map<int, ParamVector> attack_state_override_clip_aware(
    const OmniscientView& view, const AttackSpec& spec) {
  std::map<int, ParamVector> out;
  for (int i : honest_receivers(view)) {
    const double w_ib = view.mixing->at(i, view.byz_index);
    const ParamVector& self = half_step(view, i);
    const double tau = receiver_tau(view, i);
    if (std::isinf(tau)) {
      // No clipping at the receiver: the plain override already lands exactly.
      ParamVector u = spec.target_model - honest_contribution(view, i);
      u /= w_ib;
      out.emplace(i, std::move(u));
      continue;
    }
    // Delta_R: what the receiver's clipped honest inputs will add to its state.
    ParamVector delta_r(self.size(), 0.0);
    for (int j : view.honest_set) {
      const double w = view.mixing->at(i, j);
      if (w == 0.0 || j == i) continue;
      delta_r.axpy(w, clip(half_step(view, j) - self, tau));
    }
    ParamVector desired = spec.target_model - self - delta_r;
    desired /= w_ib;
    // Pre-clipped to tau, so the receiver's own clip cannot truncate it; when
    // the target is out of reach the direction survives at radius tau.
    out.emplace(i, self + clip(desired, tau));
  }
  return out;
}

std::map<int, ParamVector> attack_sandtrap(const OmniscientView& view,
                                           const AttackSpec& spec) {
  const std::vector<int> receivers = honest_receivers(view);
  const int v = spec.victim;
  if (std::find(receivers.begin(), receivers.end(), v) == receivers.end()) {
    throw std::invalid_argument("sandtrap: victim " + std::to_string(v) +
                                " is not an honest neighbor of the byzantine node");
  }
  std::map<int, ParamVector> out;
  for (int i : receivers) {
    if (i == v) {
      const double w_vb = view.mixing->at(v, view.byz_index);
      ParamVector u = half_step(view, v) - honest_contribution(view, v);
      u /= w_vb;
      out.emplace(i, std::move(u));
    } else {
      out.emplace(i, honest_contribution(view, i, /*excluded=*/v));
    }
  }
  return out;
}

std::map<int, ParamVector> attack_dissensus(const OmniscientView& view,
                                            const AttackSpec& spec) {
  std::map<int, ParamVector> out;
  for (int i : honest_receivers(view)) {
    const double w_ib = view.mixing->at(i, view.byz_index);
    const ParamVector& self = half_step(view, i);
    // Honest drift: sum_j W_ij (theta_j - theta_i).
    ParamVector drift(self.size(), 0.0);
    for (int j : view.honest_set) {
      const double w = view.mixing->at(i, j);
      if (w == 0.0 || j == i) continue;
      drift.axpy(w, half_step(view, j) - self);
    }
    ParamVector u = self;
    u.axpy(-spec.epsilon / w_ib, drift);
    out.emplace(i, std::move(u));
  }
  return out;
}

std::map<int, ParamVector> attack_noisy_dl(const OmniscientView& view,
                                           const AttackSpec& spec,
                                           std::uint64_t seed) {
  std::map<int, ParamVector> out;
  for (int i : honest_receivers(view)) {
    RandomStream stream(seed, StreamPurpose::noisy_z,
                        static_cast<std::uint64_t>(view.epoch),
                        static_cast<std::uint64_t>(i));
    const ParamVector& self = half_step(view, i);
    ParamVector u = (1.0 - spec.epsilon) * self;
    for (std::size_t d = 0; d < u.size(); ++d) {
      u[d] += spec.epsilon * stream.uniform(0.0, spec.noise_high);
    }
    out.emplace(i, std::move(u));
  }
  return out;
}

ParamVector attack_noisy_fl(const OmniscientView& view, const AttackSpec& spec,
                            std::uint64_t seed) {
  if (view.honest_set.empty()) throw std::invalid_argument("attack: no honest users");
  ParamVector mean(half_step(view, view.honest_set.front()).size(), 0.0);
  for (int j : view.honest_set) mean.axpy(1.0 / view.honest_set.size(), half_step(view, j));

  // One update per round; the receiver slot of the stream key is pinned to a
  // server tag so dl and fl draws never collide.
  constexpr std::uint64_t kServerTag = 0xf1;
  RandomStream stream(seed, StreamPurpose::noisy_z,
                      static_cast<std::uint64_t>(view.epoch), kServerTag);
  ParamVector u = (1.0 - spec.epsilon) * mean;
  for (std::size_t d = 0; d < u.size(); ++d) {
    u[d] += spec.epsilon * stream.uniform(0.0, spec.noise_high);
  }
  return u;
}

}  // namespace dlsim
