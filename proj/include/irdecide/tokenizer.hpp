#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace irdecide::io {

enum class TokenizerMode { kWord, kSubword };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::kWord;
  // Subword mode: one vocabulary entry per line (BERT vocab.txt layout).
  std::optional<std::filesystem::path> vocab_path;
  // Subword mode alternative to vocab_path, mostly for tests.
  std::optional<std::vector<std::string>> vocabulary;
  std::string continuation_prefix = "##";
  std::string unknown_token = "[UNK]";
  // Words longer than this (in code points) map straight to unknown_token.
  std::size_t max_word_chars = 100;

  bool operator==(const TokenizerConfig&) const = default;
};

/// Deterministic text tokenizer.
///
/// Word mode lowercases and splits on every run of non-alphanumeric code
/// points. Subword mode first applies the word split, then segments each
/// word by greedy longest-match against the vocabulary; pieces after the
/// first carry the continuation prefix. A word that cannot be segmented
/// becomes the unknown token.
///
/// Case folding covers Latin, Greek and Cyrillic; other scripts pass
/// through unchanged. Invalid UTF-8 bytes are treated as separators.
class Tokenizer {
 public:
  /// Throws ConfigError in subword mode when no vocabulary is configured or
  /// the vocabulary file cannot be read.
  explicit Tokenizer(TokenizerConfig config = {});

  std::vector<std::string> operator()(std::string_view text) const;

  const TokenizerConfig& config() const noexcept { return config_; }

 private:
  void segment_word(const std::u32string& word,
                    std::vector<std::string>& out) const;

  TokenizerConfig config_;
  std::shared_ptr<const std::unordered_set<std::string>> vocab_;
};

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizerConfig& config = {});

// UTF-8 helpers shared with the slicing code.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
bool is_alphanumeric(char32_t c);
char32_t to_lower(char32_t c);

}  // namespace irdecide::io
