#pragma once

#include "jamdet/ad/nn.hpp"

#include <string>

namespace jamdet::ad {

// Text checkpoint: one header line, then per tensor
//   <name> <trainable 0|1> <rank> <dims...>
//   <values, 17 significant digits, space separated>
// Values survive a save/load cycle bit-identically.
std::string serialize_parameters(const ParameterList& params);
ParameterList parse_parameters(const std::string& text, const std::string& source = "<string>");

void save_checkpoint(const std::string& path, const ParameterList& params);
ParameterList load_checkpoint(const std::string& path);

// Copies values from `source` into the tensors of `target`, matching by name.
// Every target name must be present with an identical shape.
void assign_parameters(const ParameterList& target, const ParameterList& source);

}  // namespace jamdet::ad
