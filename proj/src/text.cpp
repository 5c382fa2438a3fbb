#include "socialscope/text.hpp"

#include <cstdio>

namespace socialscope::text {

namespace {

bool is_username_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string casefold(std::string_view s) {
    std::string out(s);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto c = static_cast<unsigned char>(out[i]);
        if (c >= 'A' && c <= 'Z') {
            out[i] = static_cast<char>(c + 32);
        } else if (c == 0xC3 && i + 1 < out.size()) {
            auto d = static_cast<unsigned char>(out[i + 1]);
            // U+00C0..U+00DE except U+00D7 (multiplication sign)
            if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
            ++i;
        }
    }
    return out;
}

bool is_word_byte(unsigned char c) { return is_username_byte(c) || c >= 0x80; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    return casefold(s.substr(0, prefix.size())) == casefold(prefix);
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return casefold(haystack).find(casefold(needle)) != std::string::npos;
}

std::vector<std::string> extract_hashtags(std::string_view s) {
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '#') continue;
        if (i > 0 && is_word_byte(static_cast<unsigned char>(s[i - 1]))) continue;
        std::size_t j = i + 1;
        while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i + 1) tags.emplace_back(s.substr(i, j - i));
        i = j - 1;
    }
    return tags;
}

std::vector<std::string> extract_mentions(std::string_view s) {
    std::vector<std::string> users;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '@') continue;
        if (i > 0 && is_word_byte(static_cast<unsigned char>(s[i - 1]))) continue;
        std::size_t j = i + 1;
        while (j < s.size() && is_username_byte(static_cast<unsigned char>(s[j]))) ++j;
        std::size_t len = j - i - 1;
        bool terminated = j == s.size() || !is_word_byte(static_cast<unsigned char>(s[j]));
        if (len >= 1 && len <= 15 && terminated) users.push_back(casefold(s.substr(i + 1, len)));
        i = j - 1;
    }
    return users;
}

bool has_retweet_prefix(std::string_view s) { return starts_with_ci(trim(s), "RT @"); }

std::string_view strip_retweet_prefix(std::string_view s) {
    std::string_view t = trim(s);
    if (!starts_with_ci(t, "RT @")) return s;
    std::size_t j = 4;
    while (j < t.size() && is_username_byte(static_cast<unsigned char>(t[j]))) ++j;
    if (j < t.size() && t[j] == ':') ++j;
    return trim(t.substr(j));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char ch : trim(s)) {
        if (is_space(static_cast<unsigned char>(ch))) {
            pending = true;
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(ch);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace socialscope::text

namespace socialscope::text {

bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto d = static_cast<unsigned char>(s[i + k]);
            if ((d & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (d & 0x3F);
        }
        static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

}  // namespace socialscope::text
