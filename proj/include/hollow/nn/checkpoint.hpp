#pragma once

#include <map>
#include <string>

#include "hollow/nn/params.hpp"

namespace hollow::nn {

// Flat text container: a metadata map plus named tensors. Values are written
// as hex floats, so a save/load round trip is bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParamSet params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hollow::nn
