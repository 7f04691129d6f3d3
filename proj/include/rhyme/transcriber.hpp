#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rhyme/phonetics.hpp"

namespace rhyme {

// Produces raw IPA for a piece of text. Implementations must be safe to call
// concurrently.
class IpaBackend {
 public:
  virtual ~IpaBackend() = default;
  virtual std::string ipa(std::string_view text, std::string_view language) const = 0;
};

// word -> IPA lookup loaded from a `word<TAB>ipa` file. Every word of the
// input is looked up; a miss is an UnknownWordError listing the words.
class LexiconBackend final : public IpaBackend {
 public:
  explicit LexiconBackend(std::unordered_map<std::string, std::string> entries);
  static LexiconBackend load(const std::filesystem::path& tsv);

  std::string ipa(std::string_view text, std::string_view language) const override;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

// Runs an external grapheme-to-phoneme program (e.g. espeak-ng) once per
// call. `{lang}` in the argument list is replaced by the language code and
// the text is appended as the final argument. No shell is involved.
class ProcessBackend final : public IpaBackend {
 public:
  explicit ProcessBackend(std::vector<std::string> argv);
  static ProcessBackend from_command_line(std::string_view command);

  std::string ipa(std::string_view text, std::string_view language) const override;

 private:
  std::vector<std::string> argv_;
};

// Backend + feature table + cache keyed by (language, text).
// Lookups take a shared lock; inserts are serialized.
class Transcriber {
 public:
  Transcriber(std::shared_ptr<const IpaBackend> backend, const FeatureTable& table);

  std::shared_ptr<const Transcription> transcribe(std::string_view text,
                                                  std::string_view language) const;
  const FeatureTable& features() const noexcept { return *table_; }
  std::size_t cache_size() const;

 private:
  std::shared_ptr<const IpaBackend> backend_;
  const FeatureTable* table_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const Transcription>> cache_;
};

}  // namespace rhyme
