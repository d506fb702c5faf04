#include "irdecide/tokenizer.hpp"

#include <fstream>

#include "irdecide/error.hpp"

namespace irdecide::io {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

struct Range {
  char32_t first;
  char32_t last;
};

// Non-ASCII code points treated as separators: Latin-1 punctuation and
// symbols, a handful of script-specific punctuation marks, the general
// punctuation and symbol blocks, CJK and fullwidth punctuation, emoji.
constexpr Range kSeparatorRanges[] = {
    {0x0080, 0x00A9}, {0x00AB, 0x00B1}, {0x00B4, 0x00B4}, {0x00B6, 0x00B8},
    {0x00BB, 0x00BB}, {0x00BF, 0x00BF}, {0x00D7, 0x00D7}, {0x00F7, 0x00F7},
    {0x037E, 0x037E}, {0x0387, 0x0387}, {0x055A, 0x055F}, {0x0589, 0x058A},
    {0x05BE, 0x05BE}, {0x05C0, 0x05C0}, {0x05C3, 0x05C3}, {0x05F3, 0x05F4},
    {0x060C, 0x060D}, {0x061B, 0x061F}, {0x066A, 0x066D}, {0x06D4, 0x06D4},
    {0x0964, 0x0965}, {0x0E4F, 0x0E4F}, {0x0E5A, 0x0E5B}, {0x2000, 0x2BFF},
    {0x2E00, 0x2E7F}, {0x3000, 0x303F}, {0xFE10, 0xFE1F}, {0xFE30, 0xFE6F},
    {0xFEFF, 0xFEFF}, {0xFF00, 0xFF0F}, {0xFF1A, 0xFF20}, {0xFF3B, 0xFF40},
    {0xFF5B, 0xFF65}, {0xFFF0, 0xFFFF}, {0x1F000, 0x1FAFF},
};

std::unordered_set<std::string> load_vocabulary(const TokenizerConfig& config) {
  std::unordered_set<std::string> vocab;
  if (config.vocabulary) {
    vocab.insert(config.vocabulary->begin(), config.vocabulary->end());
    return vocab;
  }
  if (!config.vocab_path) {
    throw ConfigError("subword tokenizer requires a vocabulary file");
  }
  std::ifstream in(*config.vocab_path);
  if (!in) {
    throw ConfigError("cannot read vocabulary file " +
                      config.vocab_path->string());
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.insert(line);
  }
  return vocab;
}

// Splits on non-alphanumeric runs and lowercases.
std::vector<std::u32string> split_words(std::string_view text) {
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t c : decode_utf8(text)) {
    if (is_alphanumeric(c)) {
      current.push_back(to_lower(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto byte = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (byte < 0x80) {
      len = 1;
      cp = byte;
    } else if ((byte & 0xE0) == 0xC0) {
      len = 2;
      cp = byte & 0x1F;
    } else if ((byte & 0xF0) == 0xE0) {
      len = 3;
      cp = byte & 0x0F;
    } else if ((byte & 0xF8) == 0xF0) {
      len = 4;
      cp = byte & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (!valid || cp < kMinForLength[len] || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_alphanumeric(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  }
  for (const Range& r : kSeparatorRanges) {
    if (c < r.first) return true;  // ranges are sorted
    if (c <= r.last) return false;
  }
  return true;
}

char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 0x20 : c;
  // Latin-1 Supplement
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  // Latin Extended-A
  if (c == 0x130) return U'i';
  if (c >= 0x100 && c <= 0x137) return c | 1;
  if (c >= 0x139 && c <= 0x148) return (c & 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c & 1) ? c + 1 : c;
  // Greek
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 0x25;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 0x3F;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;
  // Cyrillic
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x460 && c <= 0x481) return c | 1;
  if (c >= 0x48A && c <= 0x4BF) return c | 1;
  return c;
}

Tokenizer::Tokenizer(TokenizerConfig config) : config_(std::move(config)) {
  if (config_.mode == TokenizerMode::kSubword) {
    vocab_ = std::make_shared<const std::unordered_set<std::string>>(
        load_vocabulary(config_));
  }
}

std::vector<std::string> Tokenizer::operator()(std::string_view text) const {
  std::vector<std::string> tokens;
  for (const std::u32string& word : split_words(text)) {
    if (config_.mode == TokenizerMode::kWord) {
      tokens.push_back(encode_utf8(word));
    } else {
      segment_word(word, tokens);
    }
  }
  return tokens;
}

void Tokenizer::segment_word(const std::u32string& word,
                             std::vector<std::string>& out) const {
  if (word.size() > config_.max_word_chars) {
    out.push_back(config_.unknown_token);
    return;
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string match;
    for (; end > start; --end) {
      std::string piece =
          encode_utf8(std::u32string_view(word).substr(start, end - start));
      if (start > 0) piece = config_.continuation_prefix + piece;
      if (vocab_->contains(piece)) {
        match = std::move(piece);
        break;
      }
    }
    if (end == start) {
      out.push_back(config_.unknown_token);
      return;
    }
    pieces.push_back(std::move(match));
    start = end;
  }
  for (std::string& p : pieces) out.push_back(std::move(p));
}

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config) {
  return Tokenizer(config)(text);
}

}  // namespace irdecide::io
