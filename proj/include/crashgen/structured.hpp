// Copyright 2026 The crashgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crashgen/io.hpp"
#include "crashgen/scenario.hpp"

namespace crashgen
{

// ---------------------------------------------------------------------------
// The 8-dimensional structured agent representation. Five slots carry
// semantics (quadrant, distance bin, orientation, speed bin, action); the
// remaining three are reserved and round-tripped verbatim.

enum class Orientation
{
  ParallelSame,
  ParallelOpposite,
  PerpendicularLeft,
  PerpendicularRight,
};

enum class AgentAction
{
  TurnLeft,
  TurnRight,
  Accelerate,
  Decelerate,
  KeepSpeed,
  Stop,
};

inline const std::map<std::string, Orientation> & orientation_names()
{
  static const std::map<std::string, Orientation> m = {
    {"parallel_same", Orientation::ParallelSame},
    {"parallel_opposite", Orientation::ParallelOpposite},
    {"perpendicular_left", Orientation::PerpendicularLeft},
    {"perpendicular_right", Orientation::PerpendicularRight},
  };
  return m;
}

inline const std::map<std::string, AgentAction> & action_names()
{
  static const std::map<std::string, AgentAction> m = {
    {"turn_left", AgentAction::TurnLeft},   {"turn_right", AgentAction::TurnRight},
    {"accelerate", AgentAction::Accelerate}, {"decelerate", AgentAction::Decelerate},
    {"keep_speed", AgentAction::KeepSpeed},  {"stop", AgentAction::Stop},
  };
  return m;
}

inline std::string to_string(Orientation o)
{
  for (const auto & [name, value] : orientation_names()) {
    if (value == o) return name;
  }
  throw data_error("unknown orientation enum value");
}

inline std::string to_string(AgentAction a)
{
  for (const auto & [name, value] : action_names()) {
    if (value == a) return name;
  }
  throw data_error("unknown action enum value");
}

/// Distance bin i covers [20i, 20(i+1)) meters.
inline double distance_bin_midpoint(int bin) { return 20.0 * bin + 10.0; }
/// Speed bin i covers [2.5i, 2.5(i+1)) m/s.
inline double speed_bin_midpoint(int bin) { return 2.5 * bin + 1.25; }

struct StructuredAgentSpec
{
  int quadrant = 1;       // 1..4, counterclockwise from front-left of the ego
  int distance_bin = 0;   // >= 0
  Orientation orientation = Orientation::ParallelSame;
  int speed_bin = 0;      // >= 0
  AgentAction action = AgentAction::KeepSpeed;
  std::array<double, 3> reserved{0.0, 0.0, 0.0};  // dims 6-8, semantics unassigned

  friend bool operator==(const StructuredAgentSpec &, const StructuredAgentSpec &) = default;
};

struct StructuredScene
{
  StructuredAgentSpec ego;  // quadrant/distance ignored for the ego (fixed at origin)
  std::vector<StructuredAgentSpec> others;

  friend bool operator==(const StructuredScene &, const StructuredScene &) = default;
};

// ---------------------------------------------------------------------------
// Scene document format: JSON {"ego": {...}, "others": [{...}]}, strict keys.

namespace detail
{

inline json agent_spec_to_json(const StructuredAgentSpec & a)
{
  return {{"quadrant", a.quadrant},
          {"distance_bin", a.distance_bin},
          {"orientation", to_string(a.orientation)},
          {"speed_bin", a.speed_bin},
          {"action", to_string(a.action)},
          {"reserved", json::array({a.reserved[0], a.reserved[1], a.reserved[2]})}};
}

inline StructuredAgentSpec agent_spec_from_json(const json & j, const std::string & where)
{
  if (!j.is_object()) throw parse_error(where + ": agent must be an object");
  static const std::array<std::string, 6> known = {"quadrant",  "distance_bin", "orientation",
                                                   "speed_bin", "action",       "reserved"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw parse_error(where + ": unknown key '" + it.key() + "'");
    }
  }
  StructuredAgentSpec a;
  try {
    a.quadrant = j.at("quadrant").get<int>();
    a.distance_bin = j.at("distance_bin").get<int>();
    a.speed_bin = j.at("speed_bin").get<int>();
  } catch (const json::exception & e) {
    throw parse_error(where + ": " + e.what());
  }
  if (a.quadrant < 1 || a.quadrant > 4) {
    throw validation_error(where + ": quadrant " + std::to_string(a.quadrant) +
                           " out of range 1..4");
  }
  if (a.distance_bin < 0) throw validation_error(where + ": distance_bin must be >= 0");
  if (a.speed_bin < 0) throw validation_error(where + ": speed_bin must be >= 0");
  std::string orient;
  std::string action;
  try {
    orient = j.at("orientation").get<std::string>();
    action = j.at("action").get<std::string>();
  } catch (const json::exception & e) {
    throw parse_error(where + ": " + e.what());
  }
  auto oit = orientation_names().find(orient);
  if (oit == orientation_names().end()) {
    throw validation_error(where + ": unknown orientation '" + orient + "'");
  }
  a.orientation = oit->second;
  auto ait = action_names().find(action);
  if (ait == action_names().end()) {
    throw validation_error(where + ": unknown action '" + action + "'");
  }
  a.action = ait->second;
  if (j.contains("reserved")) {
    const json & r = j.at("reserved");
    if (!r.is_array() || r.size() != 3) {
      throw parse_error(where + ": reserved must be an array of 3 numbers");
    }
    try {
      for (int i = 0; i < 3; ++i) {
        a.reserved[static_cast<size_t>(i)] = r[static_cast<size_t>(i)].get<double>();
      }
    } catch (const json::exception & e) {
      throw parse_error(where + ": " + e.what());
    }
  }
  return a;
}

}  // namespace detail

inline json structured_scene_to_json(const StructuredScene & s)
{
  json others = json::array();
  for (const StructuredAgentSpec & a : s.others) others.push_back(detail::agent_spec_to_json(a));
  return {{"ego", detail::agent_spec_to_json(s.ego)}, {"others", others}};
}

/// Canonical text form of a structured scene.
inline std::string emit_structured_scene(const StructuredScene & s)
{
  return structured_scene_to_json(s).dump(2) + "\n";
}

inline StructuredScene structured_scene_from_json(const json & j)
{
  if (!j.is_object()) throw parse_error("scene: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "ego" && it.key() != "others") {
      throw parse_error("scene: unknown key '" + it.key() + "'");
    }
  }
  if (!j.contains("ego") || !j.contains("others")) {
    throw parse_error("scene: missing required key 'ego' or 'others'");
  }
  StructuredScene s;
  s.ego = detail::agent_spec_from_json(j.at("ego"), "ego");
  const json & others = j.at("others");
  if (!others.is_array()) throw parse_error("scene: others must be an array");
  if (1 + others.size() > static_cast<size_t>(kMaxAgents)) {
    throw validation_error("scene: more than 32 agents (" + std::to_string(1 + others.size()) +
                           ")");
  }
  for (size_t i = 0; i < others.size(); ++i) {
    s.others.push_back(
      detail::agent_spec_from_json(others[i], "others[" + std::to_string(i) + "]"));
  }
  return s;
}

inline StructuredScene parse_structured_scene(const std::string & text)
{
  return structured_scene_from_json(parse_json_text(text, "scene"));
}

// ---------------------------------------------------------------------------
// Prompt templates. Each catalog entry pairs a natural-language collision
// description (with {slot} variables) with the structured scene it is meant
// to map to: the base scene plus per-option field patches.

struct SlotPatch
{
  std::string path;  // "ego.<field>" or "others[<i>].<field>"
  json value;

  friend bool operator==(const SlotPatch & a, const SlotPatch & b)
  {
    return a.path == b.path && a.value == b.value;
  }
};

struct PromptTemplate
{
  std::string name;
  std::string text;  // slot variables appear as {slot}
  std::string preferred_map;  // bundled map name hint ("straight_bidir"/"crossroads")
  json base_scene;   // scene document; must parse
  // slot name -> option name -> patches. std::map keeps enumeration order stable.
  std::map<std::string, std::map<std::string, std::vector<SlotPatch>>> slots;
};

using Bindings = std::map<std::string, std::string>;

namespace detail
{

inline std::vector<std::string> slot_names_in_text(const std::string & text)
{
  std::vector<std::string> names;
  size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    const size_t end = text.find('}', pos);
    if (end == std::string::npos) {
      throw parse_error("template text: unterminated '{' at offset " + std::to_string(pos));
    }
    names.push_back(text.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

/// Apply a patch path of the form ego.<field> / others[<i>].<field> to a
/// scene document.
inline void apply_patch(json & scene, const SlotPatch & patch)
{
  const std::string & p = patch.path;
  if (p.rfind("ego.", 0) == 0) {
    scene.at("ego")[p.substr(4)] = patch.value;
    return;
  }
  if (p.rfind("others[", 0) == 0) {
    const size_t close = p.find(']');
    if (close != std::string::npos && close + 1 < p.size() && p[close + 1] == '.') {
      const size_t idx = std::stoul(p.substr(7, close - 7));
      if (idx >= scene.at("others").size()) {
        throw data_error("template patch path '" + p + "': agent index out of range");
      }
      scene.at("others")[idx][p.substr(close + 2)] = patch.value;
      return;
    }
  }
  throw parse_error("template patch path '" + p + "': expected ego.<field> or others[i].<field>");
}

}  // namespace detail

/// Validate template structure: base scene parses, every slot in the text has
/// a declared domain, every declared slot is non-empty.
inline void validate_template(const PromptTemplate & t)
{
  structured_scene_from_json(t.base_scene);
  for (const std::string & name : detail::slot_names_in_text(t.text)) {
    if (t.slots.find(name) == t.slots.end()) {
      throw validation_error("template '" + t.name + "': slot '{" + name +
                             "}' has no declared domain");
    }
  }
  for (const auto & [slot, options] : t.slots) {
    if (options.empty()) {
      throw validation_error("template '" + t.name + "': slot '" + slot + "' has empty domain");
    }
  }
}

struct TemplateExpansion
{
  std::string prompt;
  StructuredScene scene;
};

/// Deterministic expansion: substitute slots into the text, apply the bound
/// options' patches to the base scene, parse the result.
inline TemplateExpansion expand_template(const PromptTemplate & t, const Bindings & bindings)
{
  for (const auto & [slot, options] : t.slots) {
    if (bindings.find(slot) == bindings.end()) {
      throw data_error("template '" + t.name + "': missing binding for slot '" + slot + "'");
    }
  }
  std::string prompt = t.text;
  json scene = t.base_scene;
  for (const auto & [slot, option] : bindings) {
    const auto sit = t.slots.find(slot);
    if (sit == t.slots.end()) {
      throw data_error("template '" + t.name + "': unknown slot '" + slot + "'");
    }
    const auto oit = sit->second.find(option);
    if (oit == sit->second.end()) {
      throw data_error("template '" + t.name + "': slot '" + slot + "' has no option '" + option +
                       "'");
    }
    const std::string needle = "{" + slot + "}";
    size_t pos = 0;
    while ((pos = prompt.find(needle, pos)) != std::string::npos) {
      prompt.replace(pos, needle.size(), option);
      pos += option.size();
    }
    for (const SlotPatch & patch : oit->second) detail::apply_patch(scene, patch);
  }
  return {prompt, structured_scene_from_json(scene)};
}

/// Every combination of slot options, slots and options in declared order.
inline std::vector<Bindings> enumerate_bindings(const PromptTemplate & t)
{
  std::vector<Bindings> combos{Bindings{}};
  for (const auto & [slot, options] : t.slots) {
    std::vector<Bindings> next;
    for (const Bindings & base : combos) {
      for (const auto & [option, patches] : options) {
        Bindings b = base;
        b[slot] = option;
        next.push_back(std::move(b));
      }
    }
    combos = std::move(next);
  }
  return combos;
}

// ---------------------------------------------------------------------------
// Catalog file: JSON array, one entry per template.

inline PromptTemplate template_from_json(const json & j)
{
  PromptTemplate t;
  t.name = j.at("name").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.preferred_map = j.value("map", "");
  t.base_scene = j.at("base");
  if (j.contains("slots")) {
    for (const auto & [slot, options] : j.at("slots").items()) {
      for (const auto & [option, patches] : options.items()) {
        std::vector<SlotPatch> list;
        for (const json & jp : patches) {
          list.push_back({jp.at("path").get<std::string>(), jp.at("value")});
        }
        t.slots[slot][option] = std::move(list);
      }
    }
  }
  validate_template(t);
  return t;
}

inline json template_to_json(const PromptTemplate & t)
{
  json slots = json::object();
  for (const auto & [slot, options] : t.slots) {
    json jopts = json::object();
    for (const auto & [option, patches] : options) {
      json jlist = json::array();
      for (const SlotPatch & p : patches) jlist.push_back({{"path", p.path}, {"value", p.value}});
      jopts[option] = jlist;
    }
    slots[slot] = jopts;
  }
  json j = {{"name", t.name}, {"text", t.text}, {"base", t.base_scene}, {"slots", slots}};
  if (!t.preferred_map.empty()) j["map"] = t.preferred_map;
  return j;
}

inline std::vector<PromptTemplate> load_catalog(const std::filesystem::path & path)
{
  const json j = load_json_file(path);
  if (!j.is_array()) throw parse_error(path.string() + ": catalog must be a JSON array");
  std::vector<PromptTemplate> catalog;
  std::set<std::string> names;
  for (const json & jt : j) {
    try {
      catalog.push_back(template_from_json(jt));
    } catch (const json::exception & e) {
      throw parse_error(path.string() + ": " + e.what());
    }
    if (!names.insert(catalog.back().name).second) {
      throw validation_error(path.string() + ": duplicate template name '" +
                             catalog.back().name + "'");
    }
  }
  return catalog;
}

inline void save_catalog(const std::vector<PromptTemplate> & catalog,
                         const std::filesystem::path & path)
{
  json j = json::array();
  for (const PromptTemplate & t : catalog) j.push_back(template_to_json(t));
  save_json_file(path, j);
}

// ---------------------------------------------------------------------------
// Interpreter boundary. The paper-scale system sends the prompt to an LLM and
// parses its structured reply; here the contract is text in, scene document
// out. The bundled backend looks prompts up in the expanded catalog.

class InterpreterClient
{
public:
  virtual ~InterpreterClient() = default;
  /// Request/response text contract: collision prompt in, structured scene
  /// document out. Implementations must be safe for concurrent calls or
  /// document themselves single-use.
  virtual std::string complete(const std::string & prompt) = 0;
};

/// Offline backend: exact-match lookup over all catalog expansions.
class TemplateLookupClient : public InterpreterClient
{
public:
  explicit TemplateLookupClient(const std::vector<PromptTemplate> & catalog)
  {
    for (const PromptTemplate & t : catalog) {
      for (const Bindings & b : enumerate_bindings(t)) {
        const TemplateExpansion e = expand_template(t, b);
        responses_[e.prompt] = emit_structured_scene(e.scene);
      }
    }
  }

  std::string complete(const std::string & prompt) override
  {
    const auto it = responses_.find(prompt);
    if (it == responses_.end()) {
      throw data_error("no template match for prompt: \"" + prompt + "\"");
    }
    return it->second;
  }

private:
  std::map<std::string, std::string> responses_;
};

/// Run one prompt through a client and parse the reply. Parse failures keep
/// the raw payload so the offending reply can be inspected.
inline StructuredScene interpret(const std::string & prompt, InterpreterClient & client)
{
  const std::string raw = client.complete(prompt);
  try {
    return parse_structured_scene(raw);
  } catch (const parse_error & e) {
    throw parse_error(std::string(e.what()) + "; raw client payload: " + raw);
  } catch (const validation_error & e) {
    throw validation_error(std::string(e.what()) + "; raw client payload: " + raw);
  }
}

}  // namespace crashgen
