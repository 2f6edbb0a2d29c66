#pragma once

// Portable JSON checkpoints:
//
//   {
//     "format": "ccge-checkpoint",
//     "version": 1,
//     "networks": {
//       "<name>": {
//         "layer_sizes": [in, h1, ..., out],
//         "hidden_activation": "relu",
//         "tensors": {
//           "layer0.weight": {"shape": [out, in], "data": [... row-major ...]},
//           "layer0.bias":   {"shape": [out],     "data": [...]},
//           ...
//         }
//       }
//     },
//     "metadata": { ... free-form ... }
//   }

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

#include "ccge/nn/mlp.hpp"

namespace ccge::nn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, Mlp<float>> networks;
  nlohmann::json metadata = nlohmann::json::object();
};

void checkpoint_save(const Checkpoint& checkpoint, const std::filesystem::path& path);

// Throws CheckpointFormatError (unreadable, truncated, malformed),
// CheckpointVersionError or CheckpointShapeError (tensor shape disagrees with
// layer_sizes). Nothing is returned unless the whole file parsed.
Checkpoint checkpoint_load(const std::filesystem::path& path);

// Copies the named network from a loaded checkpoint into target, which must
// already have the expected architecture. CheckpointShapeError names the
// first offending tensor; target is left untouched on error.
void load_network_into(const Checkpoint& checkpoint, const std::string& name, Mlp<float>& target);

nlohmann::json network_to_json(const Mlp<float>& net);
Mlp<float> network_from_json(const nlohmann::json& doc, const std::string& name);

}  // namespace ccge::nn
