#pragma once

// Corpus index: one JSON object per line with keys id, text, optional audio,
// optional states, kind. Paths are stored relative to the manifest file.

#include <optional>
#include <string>
#include <vector>

namespace ttekit {

enum class EntryKind { paired, unpaired, generated };

const char* to_string(EntryKind k);
EntryKind entry_kind_from_string(const std::string& s);

struct ManifestEntry {
  std::string id;
  std::string text;
  std::optional<std::string> audio_path;
  std::optional<std::string> states_path;
  EntryKind kind = EntryKind::paired;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;  // directory paths are relative to; "" for in-memory

  std::string resolve(const std::string& rel) const;
  // Checks id uniqueness and per-kind path requirements.
  void validate() const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& m);

}  // namespace ttekit
