#pragma once

#include <span>
#include <string_view>

namespace zoopose::assets {

struct Asset {
  std::string_view name;
  std::string_view text;
};

/// Shipped library skeleton files, in library order.
std::span<const Asset> library_files();
/// Agent prompt templates keyed by file stem (finder, observer, modifier).
std::span<const Asset> prompt_templates();
/// Scripted chat transcripts replayed by the mock backend, keyed by file name.
std::span<const Asset> transcript_fixtures();

}  // namespace zoopose::assets
