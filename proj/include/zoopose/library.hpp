#pragma once

#include "zoopose/skeleton.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

struct LibraryEntry {
  std::string animal_name;
  std::string pose_label;
  Skeleton skeleton;
};

/// Read-only after load. Entry order is the library order used for lookups.
class PoseLibrary {
 public:
  PoseLibrary() = default;
  /// Throws Error{schema_error} on an invalid skeleton or a repeated
  /// (animal, pose) pair.
  explicit PoseLibrary(std::vector<LibraryEntry> entries);

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// "Eagle - flying" when the animal has several poses, otherwise "Eagle".
  std::string display_name(const LibraryEntry& entry) const;
  std::vector<std::string> display_names() const;

 private:
  std::vector<LibraryEntry> entries_;
};

/// The compiled-in copy of library/.
PoseLibrary load_builtin_library();

/// Loads `<dir>/<animal>__<pose>.json` files. Order follows `<dir>/index.json`
/// when present, otherwise file names sorted. Fails atomically with
/// Error{io_error} or Error{schema_error} naming the offending file.
PoseLibrary load_library(const std::filesystem::path& dir);

struct LookupResult {
  LibraryEntry entry;
  bool ambiguous = false;  // pose omitted and the animal has several poses
};

/// Case-insensitive exact animal match; without a pose, the first entry in
/// library order wins. Throws Error{not_found}.
LookupResult lookup(const PoseLibrary& lib, std::string_view animal_name,
                    std::optional<std::string_view> pose_label = std::nullopt);

/// Resolves "Eagle - flying", "eagle" or "German Shepherd" style names.
std::optional<LibraryEntry> find_by_display_name(const PoseLibrary& lib, std::string_view name);

std::string library_file_name(const LibraryEntry& entry);

}  // namespace zoopose
