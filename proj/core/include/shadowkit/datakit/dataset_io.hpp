#pragma once

#include <filesystem>
#include <string>

#include "shadowkit/datakit/sample.hpp"

namespace shadowkit::datakit {

inline constexpr const char* kManifestName = "dataset.json";
inline constexpr int kManifestVersion = 1;

/// Writes `dir/dataset.json` plus images/, masks/ and shadowfree/ PNGs.
/// Floats are quantised to 8 bits on the way out. Every file is written
/// atomically. Throws DataError if a sample violates its invariants or ids
/// collide.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Loads a dataset written by save_dataset. Errors (DataError) name the
/// offending path or sample id: missing files, malformed manifest, duplicate
/// ids, splits that reference unknown ids or overlap.
Dataset load_dataset(const std::filesystem::path& dir);

/// Serialised manifest text exactly as save_dataset writes it.
std::string manifest_json(const Dataset& ds);

/// FNV-1a over the manifest and every file it references, in manifest order.
std::string dataset_hash(const std::filesystem::path& dir);

/// Ids become file names, so they are restricted to [A-Za-z0-9._-].
bool valid_sample_id(const std::string& id);

}  // namespace shadowkit::datakit
