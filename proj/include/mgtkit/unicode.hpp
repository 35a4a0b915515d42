#pragma once

#include <string>
#include <string_view>

namespace mgtkit {

// Codepoint-level helpers shared by the text modules. Decoding is lenient:
// invalid byte sequences decode to U+FFFD one byte at a time, so every
// operation built on top stays total.

std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);

bool is_whitespace(char32_t cp);
bool is_digit(char32_t cp);

/// Unicode general categories P* plus the Arabic marks (U+060C, U+061B,
/// U+061F, ...). Covers the major punctuation blocks; currency and math
/// symbols are not punctuation.
bool is_punct(char32_t cp);

/// Control and format codepoints (minus tab/newline/CR), bidi controls,
/// zero-width characters, BOM and noncharacters.
bool is_nonprintable(char32_t cp);

/// Arabic script letters, marks and tatweel: the Arabic blocks including
/// presentation forms, excluding Arabic digits and punctuation.
bool is_arabic(char32_t cp);

/// Latin script letters: ASCII, Latin-1 supplement and the Latin Extended
/// blocks.
bool is_latin(char32_t cp);

/// Lowercases ASCII and Latin-1 letters; everything else unchanged.
char32_t to_lower(char32_t cp);

inline constexpr char32_t kTatweel = 0x0640;

/// FNV-1a over a byte string; used for feature hashing and config digests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace mgtkit
