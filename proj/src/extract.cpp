#include "scoreforge/extract.hpp"

#include <cctype>
#include <vector>

namespace scoreforge {

namespace {

bool starts_with(const std::string& s, size_t pos, const char* token) {
  size_t n = 0;
  while (token[n]) {
    if (pos + n >= s.size() || s[pos + n] != token[n]) return false;
    ++n;
  }
  return true;
}

// Letter at pos: ASCII A-H (either case) or the full-width variants.
// Returns the canonical letter and advances len, or 0.
char letter_at(const std::string& s, size_t pos, size_t& len) {
  unsigned char c = pos < s.size() ? static_cast<unsigned char>(s[pos]) : 0;
  if (c >= 'A' && c <= 'H') { len = 1; return static_cast<char>(c); }
  if (c >= 'a' && c <= 'h') { len = 1; return static_cast<char>(c - 'a' + 'A'); }
  // Full-width A-H: U+FF21.. (EF BC A1..), a-h: U+FF41.. (EF BD 81..).
  if (pos + 2 < s.size() && c == 0xEF) {
    unsigned char c1 = s[pos + 1], c2 = s[pos + 2];
    if (c1 == 0xBC && c2 >= 0xA1 && c2 <= 0xA8) { len = 3; return static_cast<char>('A' + c2 - 0xA1); }
    if (c1 == 0xBD && c2 >= 0x81 && c2 <= 0x88) { len = 3; return static_cast<char>('A' + c2 - 0x81); }
  }
  return 0;
}

// Multi-byte separators and echo introducers.
size_t separator_at(const std::string& s, size_t pos) {
  unsigned char c = static_cast<unsigned char>(s[pos]);
  if (c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
      c == '/' || c == '&')
    return 1;
  for (const char* tok : {"\xE3\x80\x81" /* 、 */, "\xEF\xBC\x8C" /* ， */,
                          "\xEF\xBC\x9B" /* ； */}) {
    if (starts_with(s, pos, tok)) return 3;
  }
  for (const char* word : {"and", "AND", "\xE5\x92\x8C" /* 和 */,
                           "\xE4\xB8\x8E" /* 与 */}) {
    if (starts_with(s, pos, word)) return 3;
  }
  return 0;
}

size_t echo_intro_at(const std::string& s, size_t pos) {
  unsigned char c = static_cast<unsigned char>(s[pos]);
  if (c == ':' || c == '.') return 1;
  for (const char* tok : {"\xEF\xBC\x9A" /* ： */, "\xEF\xBC\x8E" /* ． */}) {
    if (starts_with(s, pos, tok)) return 3;
  }
  return 0;
}

// Parses a span interior. The grammar is a separator-delimited list of
// letters, each optionally followed by an echo of its option text.
std::optional<std::set<char>> parse_interior(const std::string& body) {
  std::set<char> out;
  size_t pos = 0;
  bool expecting_letter = true;
  while (pos < body.size()) {
    size_t sep = separator_at(body, pos);
    if (sep) {
      pos += sep;
      expecting_letter = true;
      continue;
    }
    if (!expecting_letter) return std::nullopt;
    size_t len = 0;
    char letter = letter_at(body, pos, len);
    if (!letter) return std::nullopt;
    pos += len;
    out.insert(letter);
    // Adjacent letters ("AC") are accepted; anything else after a letter
    // must be a separator, an echo introducer, or the end of the span.
    size_t peek_len = 0;
    if (pos < body.size() && letter_at(body, pos, peek_len)) continue;
    size_t intro = pos < body.size() ? echo_intro_at(body, pos) : 0;
    if (intro) {
      pos += intro;
      // Swallow the echo up to the next list separator.
      while (pos < body.size()) {
        unsigned char c = static_cast<unsigned char>(body[pos]);
        if (c == ',' || c == ';' ||
            starts_with(body, pos, "\xEF\xBC\x8C") ||
            starts_with(body, pos, "\xEF\xBC\x9B"))
          break;
        ++pos;
      }
      expecting_letter = false;
      continue;
    }
    expecting_letter = false;
  }
  if (out.empty()) return std::nullopt;
  return out;
}

struct Span {
  size_t end = 0;
  std::string body;
};

}  // namespace

std::optional<std::set<char>> extract_answer(const std::string& response) {
  std::optional<std::set<char>> best;
  size_t best_end = 0;

  auto scan = [&](const std::string& open, const std::string& close) {
    size_t pos = 0;
    while (true) {
      size_t o = response.find(open, pos);
      if (o == std::string::npos) break;
      size_t c = response.find(close, o + open.size());
      if (c == std::string::npos) break;
      // Innermost span: a nested opener restarts the search inside.
      size_t inner = response.find(open, o + open.size());
      if (inner != std::string::npos && inner < c) {
        pos = inner;
        continue;
      }
      std::string body = response.substr(o + open.size(), c - o - open.size());
      auto parsed = parse_interior(body);
      size_t end = c + close.size();
      if (parsed && end > best_end) {
        best = parsed;
        best_end = end;
      }
      pos = c + close.size();
    }
  };
  scan("[", "]");
  scan("\xE3\x80\x90", "\xE3\x80\x91");  // 【 】
  return best;
}

}  // namespace scoreforge
