#pragma once

#include <string>

#include "bondpool/sim.hpp"

namespace bondpool {

/// Load a key=value config file into `cfg`. Keys mirror SimConfig fields
/// (nested CIR fields as cir.k, cir.theta, cir.sigma, cir.r_init); '#' starts
/// a comment. Unknown keys are errors so experiment typos surface early.
bool load_sim_config(const std::string& path, SimConfig& cfg, std::string& error);

/// Parse config text (used by the loader and tests).
bool parse_sim_config(const std::string& text, SimConfig& cfg, std::string& error);

}  // namespace bondpool
