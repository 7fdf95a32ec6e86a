#pragma once

#include <string>

#include "gbl/model.hpp"

namespace gbl {

/// Model save/load as a single JSON file: architecture descriptor plus
/// row-major weight arrays, full float round-trip precision.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace gbl
