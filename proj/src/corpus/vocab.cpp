#include "ttekit/corpus/vocab.hpp"

#include "ttekit/error.hpp"

namespace ttekit {

Vocab::Vocab() {
  symbols_ = {"<sos>", "<eos>", "<unk>", " ", "'"};
  for (char c = 'a'; c <= 'z'; ++c) symbols_.emplace_back(1, c);
  for (int i = 0; i < 256; ++i) char_to_id_[i] = -1;
  char_to_id_[static_cast<unsigned char>(' ')] = 3;
  char_to_id_[static_cast<unsigned char>('\'')] = 4;
  for (char c = 'a'; c <= 'z'; ++c) char_to_id_[static_cast<unsigned char>(c)] = 5 + (c - 'a');
}

int Vocab::char_id(char c) const { return char_to_id_[static_cast<unsigned char>(c)]; }

std::vector<int> Vocab::encode(const std::string& text, bool strict) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) {
    int id = char_id(c);
    if (id < 0) {
      if (strict) throw InputError(std::string("vocab: unknown character '") + c + "' in \"" + text + "\"");
      id = unk();
    }
    ids.push_back(id);
  }
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == sos() || id == eos()) continue;
    if (id == unk()) {
      out.push_back('#');
      continue;
    }
    out += symbols_[id];
  }
  return out;
}

}  // namespace ttekit
