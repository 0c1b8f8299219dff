#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "wildscalar/grid.hpp"
#include "wildscalar/iteration.hpp"

namespace wildscalar {

/// Metadata carried by the header line of a field file.
struct FieldHeader {
  GridSpec grid;
  std::string kind;
  std::string name;
};

/// One JSON header line padded so the samples start on an 8-byte boundary, then little-endian doubles.
void write_field(const std::filesystem::path& path, const TimeSlab& slab, const std::string& kind);
FieldHeader read_field_header(const std::filesystem::path& path);
TimeSlab read_field(const std::filesystem::path& path, FieldHeader* header = nullptr);

struct Checkpoint {
  IterationState state;
  std::string config_text;
  /// Raw state.json contents.
  std::string manifest;
};

/// Writes <run_dir>/checkpoints/q<q>/ atomically and returns that directory.
std::filesystem::path write_checkpoint(const std::filesystem::path& run_dir, const IterationState& state,
                                       const std::string& config_text, const ParameterSchedule& schedule);
Checkpoint read_checkpoint(const std::filesystem::path& q_dir);
/// Highest-q complete checkpoint below run_dir, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

/// Atomically replaces `path` with `contents`.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_text(const std::filesystem::path& path);

}  // namespace wildscalar
