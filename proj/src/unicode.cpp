#include "mgtkit/unicode.hpp"

#include <cstdint>

namespace mgtkit {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

struct Range {
    char32_t lo;
    char32_t hi;  // inclusive
};

bool in_ranges(char32_t cp, const Range* ranges, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (cp >= ranges[i].lo && cp <= ranges[i].hi) return true;
    }
    return false;
}

// Major P* ranges. ASCII and Latin-1 punctuation are handled explicitly in
// is_punct because those blocks interleave punctuation with symbols.
constexpr Range kPunctRanges[] = {
    {0x05BE, 0x05BE}, {0x05C0, 0x05C0}, {0x05C3, 0x05C3}, {0x05C6, 0x05C6},
    {0x05F3, 0x05F4},                                      // Hebrew
    {0x0609, 0x060A}, {0x060C, 0x060D}, {0x061B, 0x061B},
    {0x061E, 0x061F}, {0x066A, 0x066D}, {0x06D4, 0x06D4},  // Arabic
    {0x2010, 0x2027}, {0x2030, 0x2043}, {0x2045, 0x2051},
    {0x2053, 0x205E},                                      // general punctuation
    {0x2E00, 0x2E5D},                                      // supplemental punctuation
    {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301F},
    {0x30FB, 0x30FB},                                      // CJK
    {0xFD3E, 0xFD3F},                                      // ornate parentheses
    {0xFE10, 0xFE19}, {0xFE30, 0xFE52}, {0xFE54, 0xFE61},
    {0xFE63, 0xFE63}, {0xFE68, 0xFE68}, {0xFE6A, 0xFE6B},
    {0xFF01, 0xFF03}, {0xFF05, 0xFF0A}, {0xFF0C, 0xFF0F},
    {0xFF1A, 0xFF1B}, {0xFF1F, 0xFF20}, {0xFF3B, 0xFF3D},
    {0xFF3F, 0xFF3F}, {0xFF5B, 0xFF5B}, {0xFF5D, 0xFF5D},
    {0xFF5F, 0xFF65},                                      // fullwidth forms
};

constexpr Range kArabicBlocks[] = {
    {0x0600, 0x06FF},  // Arabic
    {0x0750, 0x077F},  // Arabic Supplement
    {0x08A0, 0x08FF},  // Arabic Extended-A
    {0xFB50, 0xFDFF},  // Presentation Forms-A
    {0xFE70, 0xFEFF},  // Presentation Forms-B
};

constexpr Range kLatinRanges[] = {
    {'A', 'Z'},
    {'a', 'z'},
    {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x00FF},  // Latin-1 letters
    {0x0100, 0x024F},                                       // Latin Extended-A/B
    {0x1E00, 0x1EFF},                                       // Latin Extended Additional
};

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const auto n = bytes.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        // reject overlong encodings and surrogate range
        if (ok) {
            if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
                (cp >= 0xD800 && cp <= 0xDFFF)) {
                ok = false;
            }
        }
        if (!ok) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view codepoints) {
    std::string out;
    out.reserve(codepoints.size() * 2);
    for (char32_t cp : codepoints) append_utf8(out, cp);
    return out;
}

bool is_whitespace(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\r':
        case 0x0B:
        case 0x0C:
        case 0x85:
        case 0xA0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_digit(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 0x0660 && cp <= 0x0669) ||
           (cp >= 0x06F0 && cp <= 0x06F9);
}

bool is_punct(char32_t cp) {
    if (cp < 0x80) {
        switch (cp) {
            case '!': case '"': case '#': case '%': case '&': case '\'':
            case '(': case ')': case '*': case ',': case '-': case '.':
            case '/': case ':': case ';': case '?': case '@': case '[':
            case '\\': case ']': case '_': case '{': case '}':
                return true;
            default:
                return false;
        }
    }
    if (cp < 0x100) {
        return cp == 0xA1 || cp == 0xA7 || cp == 0xAB || cp == 0xB6 ||
               cp == 0xB7 || cp == 0xBB || cp == 0xBF;
    }
    return in_ranges(cp, kPunctRanges, sizeof(kPunctRanges) / sizeof(Range));
}

bool is_nonprintable(char32_t cp) {
    if (cp == U'\t' || cp == U'\n' || cp == U'\r') return false;
    if (cp < 0x20 || cp == 0x7F) return true;
    if (cp >= 0x80 && cp <= 0x9F) return true;  // C1 controls
    if (cp >= 0x0600 && cp <= 0x0605) return true;  // Arabic number signs (Cf)
    if (cp == 0x061C || cp == 0x06DD || cp == 0x070F) return true;
    if (cp >= 0x200B && cp <= 0x200F) return true;  // zero-width, bidi marks
    if (cp >= 0x202A && cp <= 0x202E) return true;  // bidi embedding controls
    if (cp >= 0x2060 && cp <= 0x2064) return true;
    if (cp >= 0x2066 && cp <= 0x2069) return true;
    if (cp == 0xFEFF) return true;  // BOM / zero-width no-break space
    if (cp >= 0xFFF9 && cp <= 0xFFFB) return true;
    if (cp >= 0xFDD0 && cp <= 0xFDEF) return true;  // noncharacters
    if ((cp & 0xFFFE) == 0xFFFE) return true;
    return false;
}

bool is_arabic(char32_t cp) {
    if (!in_ranges(cp, kArabicBlocks, sizeof(kArabicBlocks) / sizeof(Range))) return false;
    // digits, punctuation and format characters inside the Arabic blocks are
    // not script letters
    if (is_digit(cp) || is_punct(cp) || is_nonprintable(cp)) return false;
    return true;
}

bool is_latin(char32_t cp) {
    return in_ranges(cp, kLatinRanges, sizeof(kLatinRanges) / sizeof(Range));
}

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace mgtkit
