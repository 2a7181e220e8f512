#include "zoopose/library.hpp"

#include "zoopose/assets.hpp"
#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/text_util.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace zoopose {

PoseLibrary::PoseLibrary(std::vector<LibraryEntry> entries) : entries_(std::move(entries)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries_) {
    auto report = validate_skeleton(e.skeleton);
    if (!report.ok) {
      const auto& v = report.violations.front();
      throw Error(Errc::schema_error, "library entry '" + e.animal_name + " - " + e.pose_label +
                                          "' is invalid: " + v.kind + " (" + v.subject + ")");
    }
    if (!seen.emplace(lower(e.animal_name), lower(e.pose_label)).second) {
      throw Error(Errc::schema_error, "duplicate library entry '" + e.animal_name + " - " + e.pose_label + "'");
    }
  }
}

std::string PoseLibrary::display_name(const LibraryEntry& entry) const {
  auto same_animal = std::count_if(entries_.begin(), entries_.end(), [&](const LibraryEntry& e) {
    return iequals(e.animal_name, entry.animal_name);
  });
  if (same_animal > 1) return entry.animal_name + " - " + entry.pose_label;
  return entry.animal_name;
}

std::vector<std::string> PoseLibrary::display_names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& e : entries_) names.push_back(display_name(e));
  return names;
}

namespace {

LibraryEntry entry_from_text(std::string_view origin, std::string_view text) {
  try {
    Skeleton s = deserialize(text);
    LibraryEntry e{s.name, s.pose_description, std::move(s)};
    return e;
  } catch (const Error& err) {
    throw Error(Errc::schema_error, std::string(origin) + ": " + err.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

PoseLibrary load_builtin_library() {
  std::vector<LibraryEntry> entries;
  for (const auto& asset : assets::library_files()) {
    entries.push_back(entry_from_text(asset.name, asset.text));
  }
  return PoseLibrary(std::move(entries));
}

PoseLibrary load_library(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(Errc::io_error, "library directory not found: " + dir.string());
  }

  std::vector<std::filesystem::path> files;
  const auto index_path = dir / "index.json";
  if (std::filesystem::exists(index_path)) {
    ojson index;
    try {
      index = ojson::parse(read_file(index_path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::schema_error, index_path.string() + ": " + e.what());
    }
    if (!index.is_array()) throw Error(Errc::schema_error, index_path.string() + ": expected array of file names");
    for (const auto& name : index) {
      if (!name.is_string()) throw Error(Errc::schema_error, index_path.string() + ": expected array of file names");
      files.push_back(dir / name.get<std::string>());
    }
  } else {
    for (const auto& item : std::filesystem::directory_iterator(dir, ec)) {
      if (item.is_regular_file() && item.path().extension() == ".json") files.push_back(item.path());
    }
    if (ec) throw Error(Errc::io_error, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
  }

  std::vector<LibraryEntry> entries;
  for (const auto& path : files) {
    auto entry = entry_from_text(path.filename().string(), read_file(path));
    if (const auto report = validate_skeleton(entry.skeleton); !report.ok) {
      const auto& v = report.violations.front();
      throw Error(Errc::schema_error, path.string() + ": invalid skeleton: " + v.kind + " (" + v.subject + ")");
    }
    entries.push_back(std::move(entry));
  }
  try {
    return PoseLibrary(std::move(entries));
  } catch (const Error& e) {
    throw Error(Errc::schema_error, dir.string() + ": " + e.what());
  }
}

LookupResult lookup(const PoseLibrary& lib, std::string_view animal_name,
                    std::optional<std::string_view> pose_label) {
  std::vector<const LibraryEntry*> matches;
  for (const auto& e : lib.entries()) {
    if (iequals(e.animal_name, animal_name)) matches.push_back(&e);
  }
  if (matches.empty()) throw Error(Errc::not_found, "no library animal named '" + std::string(animal_name) + "'");
  if (pose_label) {
    for (const auto* e : matches) {
      if (iequals(e->pose_label, *pose_label)) return {*e, false};
    }
    throw Error(Errc::not_found, "no pose '" + std::string(*pose_label) + "' for '" + std::string(animal_name) + "'");
  }
  return {*matches.front(), matches.size() > 1};
}

std::optional<LibraryEntry> find_by_display_name(const PoseLibrary& lib, std::string_view name) {
  const std::string wanted = lower(trim(name));
  for (const auto& e : lib.entries()) {
    if (lower(lib.display_name(e)) == wanted) return e;
  }
  for (const auto& e : lib.entries()) {
    if (lower(e.animal_name + " - " + e.pose_label) == wanted) return e;
  }
  for (const auto& e : lib.entries()) {
    if (lower(e.animal_name) == wanted) return e;
  }
  return std::nullopt;
}

std::string library_file_name(const LibraryEntry& entry) {
  return slug(entry.animal_name) + "__" + slug(entry.pose_label) + ".json";
}

}  // namespace zoopose
