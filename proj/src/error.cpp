#include "rhyme/error.hpp"

namespace rhyme {
namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

}  // namespace

UnknownWordError::UnknownWordError(std::vector<std::string> words)
    : TranscriptionError("unknown word(s) in lexicon: " + join(words)),
      words_(std::move(words)) {}

CoverageError::CoverageError(std::string symbol)
    : Error("feature table has no row for symbol '" + symbol + "'"),
      symbol_(std::move(symbol)) {}

CoverageMismatchError::CoverageMismatchError(std::vector<std::string> missing)
    : ValidationError("annotation coverage mismatch; missing poem ids: " + join(missing)),
      missing_(std::move(missing)) {}

}  // namespace rhyme
