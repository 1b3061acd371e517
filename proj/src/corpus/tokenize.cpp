#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lexrisk/corpus.hpp"

namespace lexrisk {
namespace {

// Decodes one UTF-8 sequence starting at `pos`. Malformed bytes decode as
// themselves with length one so that nothing is ever lost.
char32_t decode(std::string_view s, std::size_t pos, std::size_t& length) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    length = 1;
    return b0;
  }
  int needed = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    needed = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    needed = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    needed = 3;
    cp = b0 & 0x07;
  } else {
    length = 1;
    return b0;
  }
  for (int i = 1; i <= needed; ++i) {
    const int c = cont(static_cast<std::size_t>(i));
    if (c < 0) {
      length = 1;
      return b0;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  length = static_cast<std::size_t>(needed) + 1;
  return cp;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text, bool lowercase) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };

  std::size_t pos = 0;
  while (pos < raw_text.size()) {
    std::size_t length = 1;
    const char32_t cp = decode(raw_text, pos, length);
    if (is_space(cp)) {
      flush();
    } else if (is_punct(cp)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(cp));
    } else if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      word.push_back(c);
    } else {
      word.append(raw_text.substr(pos, length));
    }
    pos += length;
  }
  flush();
  return tokens;
}

}  // namespace lexrisk
