#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "shadowkit/models/specs.hpp"

namespace shadowkit::models {

/// Model document: format tag, family, spec fields and the named weight
/// arrays in parameter order. Weights are written as shortest round-trip
/// decimal strings, so save -> load -> save is byte-identical.
std::string model_to_json(const Model& model);

/// Throws DataError (naming `source`) on malformed documents, unknown
/// families, or weights whose names or shapes disagree with the architecture.
Model model_from_json(std::string_view text, const std::string& source = "model");

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// The "spec" object of model_to_json on its own, compact.
std::string model_spec_json(const Model& model);

}  // namespace shadowkit::models
