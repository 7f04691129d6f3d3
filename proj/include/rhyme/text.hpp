#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Unicode-aware helpers for line tokenization. Strings are UTF-8 throughout.
namespace rhyme::text {

// Decodes UTF-8; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

bool is_letter(char32_t cp);
bool is_word_joiner(char32_t cp);  // apostrophes and hyphens
bool is_space(char32_t cp);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Word tokens of a line: maximal letter runs, where an apostrophe or hyphen
// flanked by letters stays inside the token. Lowercased.
std::vector<std::string> words(std::string_view line);

// Last word token of a line, or nullopt when the line has no letters.
std::optional<std::string> final_word(std::string_view line);

// Lowercases and strips leading/trailing non-letters ("'Feared!" -> "feared").
std::string normalize_word(std::string_view word);

}  // namespace rhyme::text
