#pragma once

#include <string>

#include "isomt/model.hpp"

namespace isomt::model {

// Binary snapshot: magic, config JSON, then every parameter in registration
// order as raw float64 rows. Loading reconstructs the model from the stored
// config and requires names and shapes to line up, so round trips are
// bit exact. Optimizer moments are not part of the file.
void save_checkpoint(const std::string& path, const Transformer& m);
Transformer load_checkpoint(const std::string& path);

}  // namespace isomt::model
