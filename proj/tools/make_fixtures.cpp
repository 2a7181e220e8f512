// Regenerates fixtures/transcripts from scripted agent replies. Run after
// editing prompts/*.txt or the library, then rebuild.
//
//   make_fixtures <repo>/fixtures/transcripts

#include "zoopose/agents.hpp"
#include "zoopose/text_util.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

using namespace zoopose;

namespace {

struct Scenario {
  std::string animal;
  std::string pose;
  std::vector<std::string> replies;  // in call order
};

std::vector<Scenario> scenarios() {
  return {
      {"Tiger",
       "standing",
       {R"({"choice": "German Shepherd", "rationale": "Both are quadrupedal carnivores with a level back, a long tail and digitigrade legs."})",
        R"({"instructions": [
  {"op": "scale_segment", "target": ["back_end", "tail_end"], "value": 1.25},
  {"op": "translate", "target": "tail_end", "value": [0.0, 0.0, -0.08]},
  {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 0.85},
  {"op": "translate", "target": "neck_end", "value": [0.0, 0.0, -0.03]}
],
"commentary": "A tiger carries its head lower and forward, has a shorter muzzle and a longer, lower tail than a shepherd dog."})"}},
      {"Kangaroo",
       "standing",
       {R"({"choice": "T-Rex", "rationale": "Upright bipedal stance on large hind legs with a heavy tail used for balance and small forelimbs."})",
        R"({"instructions": [
  {"op": "scale_segment", "target": ["thigh_front_left", "knee_front_left"], "value": 1.2},
  {"op": "scale_segment", "target": ["thigh_front_right", "knee_front_right"], "value": 1.2},
  {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 0.7},
  {"op": "translate", "target": "tail_end", "value": [0.0, 0.0, -0.1]}
],
"commentary": "Kangaroo forelimbs are a little longer than a tyrannosaur's, the head is smaller and the tail rests on the ground."})"}},
      {"northern cardinal",
       "flying",
       {"Eagle - flying",
        R"({"instructions": [
  {"op": "scale_segment", "target": ["back_end", "tail_end"], "value": 1.4},
  {"op": "scale_segment", "target": ["neck_end", "nose"], "value": 0.8}
],
"commentary": "A cardinal is a small songbird with a proportionally longer tail and a short conical beak."})"}},
      {"Zebra",
       "standing",
       {R"({"choice": "Giraffe", "rationale": "Long-legged hoofed grazer with the same gait."})",
        "Shorten the neck of the giraffe to about 40 percent of its length and lower the back end slightly.",
        R"({"instructions": [
  {"op": "scale_segment", "target": "neck_end->nose", "value": 0.4},
  {"op": "translate", "target": "back_end", "value": [0.0, 0.0, -0.02]}
],
"commentary": "Neck shortened to zebra proportions."})"}},
  };
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const auto lib = load_builtin_library();
  for (const auto& sc : scenarios()) {
    ScriptedBackend backend;
    for (const auto& r : sc.replies) backend.enqueue(r);
    try {
      const auto rec = adapt_pose(backend, lib, sc.animal, sc.pose);
      const auto path = dir / (slug(sc.animal) + "__" + slug(sc.pose) + ".json");
      std::ofstream out(path, std::ios::binary);
      out << transcript_fixture(sc.animal, sc.pose, rec.transcript).dump(2) << '\n';
      std::cout << path.string() << ": " << rec.transcript.size() << " exchanges, template "
                << rec.finder.display_name << '\n';
    } catch (const Error& e) {
      std::cerr << sc.animal << ": " << e.what() << '\n';
      return 2;
    }
  }
  return 0;
}
