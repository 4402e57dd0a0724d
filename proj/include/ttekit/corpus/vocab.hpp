#pragma once

// Character vocabulary: <sos>, <eos>, <unk>, space, apostrophe, a-z.

#include <string>
#include <vector>

namespace ttekit {

class Vocab {
 public:
  Vocab();

  int size() const { return static_cast<int>(symbols_.size()); }
  int sos() const { return 0; }
  int eos() const { return 1; }
  int unk() const { return 2; }

  const std::string& symbol(int id) const { return symbols_[id]; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  // Id of a text character, or -1 if out of vocabulary.
  int char_id(char c) const;

  // Tokenize text; unknown characters map to <unk> unless strict, in which
  // case they are rejected.
  std::vector<int> encode(const std::string& text, bool strict = false) const;

  // Inverse of encode; <sos>/<eos> are dropped, <unk> prints as '#'.
  std::string decode(const std::vector<int>& ids) const;

 private:
  std::vector<std::string> symbols_;
  int char_to_id_[256];
};

}  // namespace ttekit
