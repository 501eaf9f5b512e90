#pragma once

#include <string>
#include <vector>

#include "dlsim/config.hpp"

namespace dlsim {

// Named experiment setups: 9 nodes (8 honest users u1..u8 plus one byzantine
// neighbor b), 300 epochs, alpha 0.9, eta 0.01, zero target model. Unknown
// names throw with the list of valid presets.
ExperimentConfig preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace dlsim
