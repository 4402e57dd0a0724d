#include "ttekit/corpus/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "ttekit/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ttekit {

const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::paired: return "paired";
    case EntryKind::unpaired: return "unpaired";
    case EntryKind::generated: return "generated";
  }
  return "?";
}

EntryKind entry_kind_from_string(const std::string& s) {
  if (s == "paired") return EntryKind::paired;
  if (s == "unpaired") return EntryKind::unpaired;
  if (s == "generated") return EntryKind::generated;
  throw InputError("manifest: unknown kind \"" + s + "\"");
}

std::string Manifest::resolve(const std::string& rel) const {
  if (rel.empty() || base_dir.empty() || fs::path(rel).is_absolute()) return rel;
  return (fs::path(base_dir) / rel).string();
}

void Manifest::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& e : entries) {
    if (e.id.empty()) throw InputError("manifest: empty utterance id");
    if (!ids.insert(e.id).second) throw InputError("manifest: duplicate utterance id \"" + e.id + "\"");
    if (e.kind == EntryKind::paired && !e.audio_path) {
      throw InputError("manifest: paired entry \"" + e.id + "\" has no audio path");
    }
    if (e.kind == EntryKind::generated && !e.states_path) {
      throw InputError("manifest: generated entry \"" + e.id + "\" has no states path");
    }
  }
}

Manifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("manifest: cannot open: " + path);
  Manifest m;
  m.base_dir = fs::path(path).parent_path().string();
  std::string line;
  int line_no = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("manifest: " + path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    auto fail = [&](const std::string& why) {
      throw InputError("manifest: " + path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("kind")) {
      fail("record needs id, text and kind");
    }
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.text = j.at("text").get<std::string>();
    try {
      e.kind = entry_kind_from_string(j.at("kind").get<std::string>());
    } catch (const InputError& err) {
      fail(err.what());
    }
    if (j.contains("audio")) e.audio_path = j.at("audio").get<std::string>();
    if (j.contains("states")) e.states_path = j.at("states").get<std::string>();
    if (!ids.insert(e.id).second) fail("duplicate utterance id \"" + e.id + "\"");
    if (e.kind == EntryKind::paired && !e.audio_path) fail("kind=paired requires an audio path");
    if (e.kind == EntryKind::generated && !e.states_path) fail("kind=generated requires a states path");
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
  m.validate();
  std::ofstream os(path);
  if (!os) throw InputError("manifest: cannot open for write: " + path);
  for (const auto& e : m.entries) {
    json j;
    j["id"] = e.id;
    j["text"] = e.text;
    if (e.audio_path) j["audio"] = *e.audio_path;
    if (e.states_path) j["states"] = *e.states_path;
    j["kind"] = to_string(e.kind);
    os << j.dump() << '\n';
  }
  if (!os) throw std::runtime_error("manifest: write failed: " + path);
}

}  // namespace ttekit
