#pragma once

#include <string>

#include "gbl/graph.hpp"

namespace gbl {

/// Loads a dataset file. Graph-level files are JSON lines (one object
/// per graph); node-level files are a single JSON object. Errors carry
/// the offending record number.
Dataset load_dataset(const std::string& path, Task task);

/// Writes the dataset in the same format load_dataset reads; floats are
/// serialized with full round-trip precision.
void save_dataset(const Dataset& dataset, const std::string& path);

}  // namespace gbl
