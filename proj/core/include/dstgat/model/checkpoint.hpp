#pragma once

#include <filesystem>
#include <memory>

#include "dstgat/model/tracker.hpp"

namespace dstgat::model {

/// Writes configuration, vocabulary, ontology and every parameter.
void save_checkpoint(Tracker& tracker, const std::filesystem::path& path);

/// Rebuilds the tracker from a checkpoint. Throws data::DataError on a bad
/// magic, unsupported version, truncated file or any parameter that is
/// missing, unexpected or of the wrong shape.
std::unique_ptr<Tracker> load_checkpoint(const std::filesystem::path& path);

}  // namespace dstgat::model
