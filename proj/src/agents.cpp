#include "zoopose/agents.hpp"

#include "zoopose/assets.hpp"
#include "zoopose/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zoopose {

// ---------------------------------------------------------------------------
// Scripted backend

std::string ScriptedBackend::prompt_key(std::string_view system, std::string_view user) {
  std::string joined(system);
  joined += '\x1f';
  joined += user;
  return sha256_hex(joined);
}

void ScriptedBackend::add(std::string key, std::string response) {
  std::lock_guard lock(mu_);
  by_key_[std::move(key)] = std::move(response);
}

void ScriptedBackend::enqueue(std::string response) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(response));
}

void ScriptedBackend::set_fallback(std::string response) {
  std::lock_guard lock(mu_);
  fallback_ = std::move(response);
}

std::size_t ScriptedBackend::size() const {
  std::lock_guard lock(mu_);
  return by_key_.size();
}

namespace {

std::map<std::string, std::string> read_fixture(std::string_view name, std::string_view text) {
  const std::string file(name);
  ojson doc;
  try {
    doc = parse_json(text);
  } catch (const Error& e) {
    throw Error(Errc::schema_error, file + ": " + e.what());
  }
  const auto it = doc.is_object() ? doc.find("exchanges") : doc.end();
  if (it == doc.end() || !it->is_array()) throw Error(Errc::schema_error, file + ": $.exchanges: expected array");
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& ex = (*it)[i];
    const auto str = [&](const char* key) {
      if (!ex.is_object() || !ex.contains(key) || !ex[key].is_string()) {
        throw Error(Errc::schema_error,
                    file + ": $.exchanges[" + std::to_string(i) + "]." + key + ": expected string");
      }
      return ex[key].get<std::string>();
    };
    const auto [pos, fresh] = out.emplace(ScriptedBackend::prompt_key(str("system"), str("user")), str("response"));
    if (!fresh && pos->second != str("response")) {
      throw Error(Errc::schema_error, file + ": conflicting responses for one prompt");
    }
  }
  return out;
}

}  // namespace

void ScriptedBackend::load_fixture(std::string_view name, std::string_view text) {
  auto loaded = read_fixture(name, text);
  std::lock_guard lock(mu_);
  for (auto& [k, v] : loaded) by_key_[k] = std::move(v);
}

void ScriptedBackend::load_builtin_fixtures() {
  for (const auto& asset : assets::transcript_fixtures()) load_fixture(asset.name, asset.text);
}

void ScriptedBackend::load_fixtures(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::io_error, "fixture directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::string> all;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    for (auto& [k, v] : read_fixture(file.filename().string(), buf.str())) all[k] = std::move(v);
  }
  std::lock_guard lock(mu_);
  for (auto& [k, v] : all) by_key_[k] = std::move(v);
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  const auto key = prompt_key(request.system, request.user);
  std::lock_guard lock(mu_);
  if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
  if (!queue_.empty()) {
    auto next = std::move(queue_.front());
    queue_.pop_front();
    return next;
  }
  if (fallback_) return *fallback_;
  throw Error(Errc::backend_error, "no scripted response for prompt " + key.substr(0, 16));
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

PromptTemplate parse_template(std::string_view name, std::string_view text) {
  PromptTemplate out;
  std::string* section = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line == "[system]") {
      section = &out.system;
    } else if (line == "[user]") {
      section = &out.user;
    } else if (section) {
      *section += line;
      *section += '\n';
    }
  }
  while (!out.system.empty() && out.system.back() == '\n') out.system.pop_back();
  while (!out.user.empty() && out.user.back() == '\n') out.user.pop_back();
  if (out.system.empty() || out.user.empty()) {
    throw Error(Errc::schema_error, "prompt template '" + std::string(name) + "' needs [system] and [user] sections");
  }
  return out;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view stage) {
  static const std::map<std::string, PromptTemplate, std::less<>> templates = [] {
    std::map<std::string, PromptTemplate, std::less<>> m;
    for (const auto& asset : assets::prompt_templates()) {
      m.emplace(std::string(asset.name), parse_template(asset.name, asset.text));
    }
    return m;
  }();
  const auto it = templates.find(stage);
  if (it == templates.end()) throw Error(Errc::not_found, "no prompt template for stage '" + std::string(stage) + "'");
  return it->second;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    const std::string key(trim(text.substr(open + 2, close - open - 2)));
    const auto it = vars.find(key);
    if (it == vars.end()) throw Error(Errc::invalid_argument, "prompt placeholder '" + key + "' has no value");
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

namespace {

std::string strip_fences(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(trim(text));
  const auto body = text.find('\n', open);
  if (body == std::string_view::npos) return std::string(trim(text));
  const auto close = text.find("```", body);
  return std::string(trim(text.substr(body + 1, close == std::string_view::npos ? std::string_view::npos : close - body - 1)));
}

std::string keypoint_listing(const Skeleton& s) {
  std::string out;
  for (const auto& kp : s.keypoints) {
    if (!out.empty()) out += '\n';
    out += kp.name + ": [" + format_double(kp.position.x()) + ", " + format_double(kp.position.y()) + ", " +
           format_double(kp.position.z()) + "]";
  }
  return out;
}

std::string bone_listing(const Skeleton& s) {
  std::string out;
  for (const auto& b : s.bones) {
    if (!out.empty()) out += '\n';
    out += b.parent + " -> " + b.child;
  }
  return out;
}

std::string name_list(const Skeleton& s) {
  std::string out;
  for (const auto& kp : s.keypoints) {
    if (!out.empty()) out += ", ";
    out += kp.name;
  }
  return out;
}

std::string exchange(ChatBackend& backend, const PromptTemplate& tmpl, const std::map<std::string, std::string>& vars,
                     std::string_view stage, int attempt, Transcript* transcript) {
  ChatRequest req;
  req.system = render_template(tmpl.system, vars);
  req.user = render_template(tmpl.user, vars);
  auto response = backend.complete(req);
  if (transcript) transcript->push_back({std::string(stage), attempt, req.system, req.user, response});
  return response;
}

}  // namespace

// ---------------------------------------------------------------------------
// Finder

std::optional<std::pair<LibraryEntry, std::string>> parse_finder_response(const PoseLibrary& lib,
                                                                          std::string_view response) {
  const auto text = strip_fences(response);
  std::string choice;
  std::string rationale;
  if (!text.empty() && text.front() == '{') {
    try {
      const auto doc = ojson::parse(text);
      if (doc.contains("choice") && doc["choice"].is_string()) choice = doc["choice"].get<std::string>();
      if (doc.contains("rationale") && doc["rationale"].is_string()) rationale = doc["rationale"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  } else {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {
    }
    std::string_view first = trim(line);
    while (!first.empty() && (first.front() == '"' || first.front() == '\'')) first.remove_prefix(1);
    while (!first.empty() && (first.back() == '"' || first.back() == '\'' || first.back() == '.')) first.remove_suffix(1);
    choice = std::string(first);
  }
  auto entry = find_by_display_name(lib, choice);
  if (!entry) return std::nullopt;
  return std::make_pair(std::move(*entry), rationale);
}

FinderResult finder_select(ChatBackend& backend, const PoseLibrary& lib, std::string_view animal,
                           std::span<const std::string_view> keypoint_names, Transcript* transcript) {
  if (lib.empty()) throw Error(Errc::empty_library, "the pose library is empty");
  std::string library;
  for (const auto& name : lib.display_names()) library += "- " + name + "\n";
  std::string keypoints;
  for (auto k : keypoint_names) {
    if (!keypoints.empty()) keypoints += ", ";
    keypoints += k;
  }
  std::map<std::string, std::string> vars{
      {"animal", std::string(animal)}, {"library", library}, {"keypoints", keypoints}, {"feedback", ""}};
  const auto& tmpl = prompt_template("finder");
  std::vector<std::string> rejected;
  for (int attempt = 0; attempt <= kFinderRetries; ++attempt) {
    const auto response = exchange(backend, tmpl, vars, "finder", attempt, transcript);
    if (auto parsed = parse_finder_response(lib, response)) {
      FinderResult out;
      out.display_name = lib.display_name(parsed->first);
      out.chosen = std::move(parsed->first);
      out.rationale = std::move(parsed->second);
      return out;
    }
    rejected.push_back(std::string(trim(response)));
    vars["feedback"] = "\nYour previous answer \"" + rejected.back() +
                       "\" is not a library entry. Choose one entry exactly as it is listed.";
  }
  std::string detail;
  for (const auto& r : rejected) detail += (detail.empty() ? "" : " | ") + r;
  throw Error(Errc::unparseable_response,
              "no library entry named after " + std::to_string(kFinderRetries + 1) + " attempts: " + detail);
}

// ---------------------------------------------------------------------------
// Observer

std::string_view to_string(InstructionOp op) {
  switch (op) {
    case InstructionOp::translate: return "translate";
    case InstructionOp::set_position: return "set_position";
    case InstructionOp::scale_segment: return "scale_segment";
  }
  return "?";
}

namespace {

std::optional<Bone> parse_segment(const ojson& target) {
  if (target.is_array() && target.size() == 2 && target[0].is_string() && target[1].is_string()) {
    return Bone{target[0].get<std::string>(), target[1].get<std::string>()};
  }
  if (!target.is_string()) return std::nullopt;
  const auto text = target.get<std::string>();
  for (std::string_view arrow : {"->", "→"}) {
    const auto at = text.find(arrow);
    if (at == std::string::npos) continue;
    const auto a = trim(std::string_view(text).substr(0, at));
    const auto b = trim(std::string_view(text).substr(at + arrow.size()));
    if (a.empty() || b.empty()) return std::nullopt;
    return Bone{std::string(a), std::string(b)};
  }
  return std::nullopt;
}

Instruction parse_instruction(const ojson& item) {
  auto bad = [](const std::string& what) { return Error(Errc::unparseable_response, what); };
  if (!item.is_object()) throw bad("expected an object");
  if (!item.contains("op") || !item["op"].is_string()) throw bad("missing \"op\"");
  if (!item.contains("target")) throw bad("missing \"target\"");
  if (!item.contains("value")) throw bad("missing \"value\"");
  const auto op = item["op"].get<std::string>();
  const auto& target = item["target"];
  const auto& value = item["value"];
  Instruction ins;
  if (op == "translate" || op == "set_position") {
    ins.op = op == "translate" ? InstructionOp::translate : InstructionOp::set_position;
    if (!target.is_string() || target.get<std::string>().empty()) throw bad("target must be a keypoint name");
    ins.target = target.get<std::string>();
    if (!value.is_array() || value.size() != 3) throw bad("value must be [x, y, z]");
    for (int i = 0; i < 3; ++i) {
      if (!value[i].is_number()) throw bad("value must be [x, y, z]");
      ins.vector[i] = value[i].get<double>();
    }
    if (!ins.vector.allFinite()) throw bad("value must be finite");
  } else if (op == "scale_segment") {
    ins.op = InstructionOp::scale_segment;
    ins.segment = parse_segment(target);
    if (!ins.segment) throw bad("target must be [parent, child] or \"parent->child\"");
    ins.target = ins.segment->parent + "->" + ins.segment->child;
    if (!value.is_number()) throw bad("value must be a positive number");
    ins.factor = value.get<double>();
    if (!std::isfinite(ins.factor) || !(ins.factor > 0.0)) throw bad("scale factor must be finite and > 0");
  } else {
    throw bad("unknown op \"" + op + "\"");
  }
  return ins;
}

}  // namespace

ObservationPlan parse_plan(std::string_view response) {
  const auto text = strip_fences(response);
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception&) {
    std::string lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      lines += (lines.empty() ? "" : " | ") + std::string(trim(line));
    }
    throw Error(Errc::unparseable_response, "plan is not JSON: " + lines);
  }
  ObservationPlan plan;
  const ojson* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("instructions")) throw Error(Errc::unparseable_response, "plan has no \"instructions\" field");
    list = &doc["instructions"];
    if (doc.contains("commentary")) {
      if (!doc["commentary"].is_string()) throw Error(Errc::unparseable_response, "\"commentary\" must be a string");
      plan.commentary = doc["commentary"].get<std::string>();
    }
  }
  if (!list->is_array()) throw Error(Errc::unparseable_response, "instructions must be an array");
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < list->size(); ++i) {
    try {
      plan.instructions.push_back(parse_instruction((*list)[i]));
    } catch (const Error& e) {
      errors.push_back("instructions[" + std::to_string(i) + "] " + (*list)[i].dump() + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
    throw Error(Errc::unparseable_response, msg);
  }
  return plan;
}

ObservationPlan observer_plan(ChatBackend& backend, const Skeleton& chosen, std::string_view chosen_name,
                              std::string_view animal, std::string_view pose, Transcript* transcript) {
  const std::map<std::string, std::string> vars{{"template", std::string(chosen_name)},
                                                {"animal", std::string(animal)},
                                                {"pose", std::string(pose)},
                                                {"keypoints", keypoint_listing(chosen)},
                                                {"bones", bone_listing(chosen)}};
  return parse_plan(exchange(backend, prompt_template("observer"), vars, "observer", 0, transcript));
}

ObservationPlan modifier_translate(ChatBackend& backend, const Skeleton& chosen, std::string_view plan_text,
                                   Transcript* transcript) {
  const std::map<std::string, std::string> vars{{"keypoints", name_list(chosen)}, {"plan", std::string(plan_text)}};
  return parse_plan(exchange(backend, prompt_template("modifier"), vars, "modifier", 0, transcript));
}

// ---------------------------------------------------------------------------
// Modifier

namespace {

std::vector<std::size_t> moved_by_scale(const Skeleton& s, std::size_t parent, std::size_t child) {
  std::vector<std::vector<std::size_t>> adj(s.keypoints.size());
  for (const auto& b : s.bones) {
    const auto a = *s.index_of(b.parent);
    const auto c = *s.index_of(b.child);
    adj[a].push_back(c);
    adj[c].push_back(a);
  }
  std::vector<bool> seen(s.keypoints.size(), false);
  seen[parent] = true;
  seen[child] = true;
  std::vector<std::size_t> order{child};
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (auto n : adj[order[head]]) {
      if (!seen[n]) {
        seen[n] = true;
        order.push_back(n);
      }
    }
  }
  return order;
}

}  // namespace

Skeleton modifier_apply(const Skeleton& chosen, const ObservationPlan& plan) {
  Skeleton s = chosen;
  for (std::size_t i = 0; i < plan.instructions.size(); ++i) {
    const auto& ins = plan.instructions[i];
    const std::string where = "instruction " + std::to_string(i) + " (" + std::string(to_string(ins.op)) + ")";
    if (ins.op == InstructionOp::scale_segment) {
      if (!ins.segment) throw Error(Errc::unknown_target, where + ": no segment");
      const auto p = s.index_of(ins.segment->parent);
      const auto c = s.index_of(ins.segment->child);
      if (!p || !c || !s.has_bone(ins.segment->parent, ins.segment->child)) {
        throw Error(Errc::unknown_target, where + ": no bone " + ins.segment->parent + "-" + ins.segment->child);
      }
      if (!std::isfinite(ins.factor) || !(ins.factor > 0.0)) {
        throw Error(Errc::non_finite_result, where + ": invalid scale factor");
      }
      const Vec3 base = s.keypoints[*p].position;
      const Vec3 old_child = s.keypoints[*c].position;
      const Vec3 delta = base + ins.factor * (old_child - base) - old_child;
      for (auto k : moved_by_scale(s, *p, *c)) s.keypoints[k].position += delta;
    } else {
      const auto k = s.index_of(ins.target);
      if (!k) throw Error(Errc::unknown_target, where + ": unknown keypoint '" + ins.target + "'");
      if (ins.op == InstructionOp::translate) {
        s.keypoints[*k].position += ins.vector;
      } else {
        s.keypoints[*k].position = ins.vector;
      }
    }
    for (const auto& kp : s.keypoints) {
      if (!kp.position.allFinite()) throw Error(Errc::non_finite_result, where + ": '" + kp.name + "' is not finite");
    }
  }
  const auto report = validate_skeleton(s);
  if (!report.ok) {
    const auto& v = report.violations.front();
    throw Error(Errc::invalid_skeleton, "modified skeleton is invalid: " + v.kind + " " + v.subject);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Pipeline

AdaptationRecord adapt_pose(ChatBackend& backend, const PoseLibrary& lib, std::string_view animal,
                            std::string_view pose) {
  AdaptationRecord rec;
  rec.animal = std::string(animal);
  rec.pose = std::string(pose);
  const auto& names = canonical_keypoint_names();
  try {
    rec.finder = finder_select(backend, lib, animal, names, &rec.transcript);
  } catch (const Error& e) {
    throw StageError("finder", e, rec.transcript);
  }
  try {
    rec.plan = observer_plan(backend, rec.finder.chosen.skeleton, rec.finder.display_name, animal, pose,
                             &rec.transcript);
  } catch (const Error& e) {
    if (e.code() != Errc::unparseable_response || rec.transcript.empty()) throw StageError("observer", e, rec.transcript);
    const auto raw = rec.transcript.back().response;
    try {
      rec.plan = modifier_translate(backend, rec.finder.chosen.skeleton, raw, &rec.transcript);
      rec.plan_translated = true;
    } catch (const Error& e2) {
      throw StageError("modifier", e2, rec.transcript);
    }
  }
  try {
    rec.result = modifier_apply(rec.finder.chosen.skeleton, rec.plan);
  } catch (const Error& e) {
    throw StageError("modifier", e, rec.transcript);
  }
  rec.result.name = rec.animal;
  rec.result.pose_description = rec.pose;
  return rec;
}

// ---------------------------------------------------------------------------
// JSON

ojson instruction_to_json(const Instruction& ins) {
  ojson doc;
  doc["op"] = std::string(to_string(ins.op));
  if (ins.op == InstructionOp::scale_segment && ins.segment) {
    doc["target"] = {ins.segment->parent, ins.segment->child};
    doc["value"] = ins.factor;
  } else {
    doc["target"] = ins.target;
    doc["value"] = {ins.vector.x(), ins.vector.y(), ins.vector.z()};
  }
  return doc;
}

ojson plan_to_json(const ObservationPlan& plan) {
  ojson doc;
  ojson list = ojson::array();
  for (const auto& ins : plan.instructions) list.push_back(instruction_to_json(ins));
  doc["instructions"] = std::move(list);
  doc["commentary"] = plan.commentary;
  return doc;
}

ojson transcript_to_json(const Transcript& transcript) {
  ojson list = ojson::array();
  for (const auto& t : transcript) {
    ojson item;
    item["stage"] = t.stage;
    item["attempt"] = t.attempt;
    item["system"] = t.system;
    item["user"] = t.user;
    item["response"] = t.response;
    list.push_back(std::move(item));
  }
  return list;
}

ojson record_to_json(const AdaptationRecord& rec) {
  ojson doc;
  doc["request"] = {{"animal", rec.animal}, {"pose", rec.pose}};
  ojson finder;
  finder["chosen"] = rec.finder.display_name;
  finder["animal_name"] = rec.finder.chosen.animal_name;
  finder["pose_label"] = rec.finder.chosen.pose_label;
  finder["rationale"] = rec.finder.rationale;
  doc["finder"] = std::move(finder);
  doc["plan"] = plan_to_json(rec.plan);
  doc["plan_translated"] = rec.plan_translated;
  doc["result"] = skeleton_to_json(rec.result);
  doc["transcript"] = transcript_to_json(rec.transcript);
  return doc;
}

ojson transcript_fixture(std::string_view animal, std::string_view pose, const Transcript& transcript) {
  ojson doc;
  doc["request"] = {{"animal", std::string(animal)}, {"pose", std::string(pose)}};
  doc["exchanges"] = transcript_to_json(transcript);
  return doc;
}

}  // namespace zoopose
