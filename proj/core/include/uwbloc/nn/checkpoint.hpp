#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "uwbloc/nn/tensor.hpp"

namespace uwbloc::nn {

// Plain-text weight archive. Tensor order is preserved so files round-trip
// byte for byte; values are written with 17 significant digits.
struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws data_error on unreadable, malformed, or truncated files.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uwbloc::nn
