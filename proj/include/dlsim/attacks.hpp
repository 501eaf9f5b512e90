#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlsim/params.hpp"
#include "dlsim/topology.hpp"

namespace dlsim {

enum class AttackKind {
  honest,  // no attack: the marked node follows the protocol
  state_override,
  state_override_clip_aware,
  sandtrap,
  dissensus,
  noisy,
};

std::string to_string(AttackKind kind);
std::optional<AttackKind> attack_kind_from_string(const std::string& name);

struct AttackSpec {
  AttackKind kind = AttackKind::honest;
  ParamVector target_model;  // state-override payload
  int victim = -1;           // sandtrap
  double epsilon = 1.0;      // dissensus scale / noisy strength
  double noise_high = 0.01;  // noisy z entries are uniform in [0, noise_high]

  bool operator==(const AttackSpec&) const = default;
};

// Everything the rushing, omniscient adversary sees before sending: all
// honest half-steps of the current epoch, the mixing weights, and (for
// clip-aware variants) the clipping radius each receiver will apply.
struct OmniscientView {
  int epoch = 0;
  const MixingMatrix* mixing = nullptr;
  int byz_index = -1;
  std::vector<int> honest_set;                  // sorted
  std::map<int, ParamVector> honest_half_steps; // one entry per honest node
  std::map<int, double> receiver_tau;           // honest neighbors of b only
};

// Each attack returns the update the adversary sends to every honest
// neighbor, keyed by receiver. Honest sums in the formulas range over the
// receiver's honest in-neighborhood (W_ij = 0 for non-neighbors).

// Cancels the receiver's honest contribution and substitutes the target:
// under naive aggregation the receiver's next state is exactly the target.
std::map<int, ParamVector> attack_state_override(const OmniscientView& view,
                                                 const AttackSpec& spec);

// State override shaped to survive self-centered clipping: the sent
// difference is pre-clipped to the receiver's radius, so the receiver's own
// clip is a no-op and the step toward the target is maximal admissible.
std::map<int, ParamVector> attack_state_override_clip_aware(
    const OmniscientView& view, const AttackSpec& spec);

// Freezes the victim at its own half-step; non-targets get the honest
// contribution with the victim's share removed.
std::map<int, ParamVector> attack_sandtrap(const OmniscientView& view,
                                           const AttackSpec& spec);

// Cancels the honest drift term at each receiver (scaled by epsilon), so with
// naive aggregation and epsilon = 1 nobody gains anything from gossip.
std::map<int, ParamVector> attack_dissensus(const OmniscientView& view,
                                            const AttackSpec& spec);

// Echoes back (1 - eps) * receiver's half-step + eps * z with fresh noise per
// (epoch, receiver).
std::map<int, ParamVector> attack_noisy_dl(const OmniscientView& view,
                                           const AttackSpec& spec,
                                           std::uint64_t seed);

// Federated variant: one update per round, a noisy echo of the honest mean.
ParamVector attack_noisy_fl(const OmniscientView& view, const AttackSpec& spec,
                            std::uint64_t seed);

}  // namespace dlsim
