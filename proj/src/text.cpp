#include "asag/text.hpp"

#include <cctype>

namespace asag::text {

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string casefold(std::string_view s) {
    std::string out(s);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto c = static_cast<unsigned char>(out[i]);
        if (c >= 'A' && c <= 'Z') {
            out[i] = static_cast<char>(c + ('a' - 'A'));
        } else if (c == 0xC3 && i + 1 < out.size()) {
            auto n = static_cast<unsigned char>(out[i + 1]);
            // U+00C0..U+00DE except U+00D7 (multiplication sign)
            if (n >= 0x80 && n <= 0x9E && n != 0x97) {
                out[i + 1] = static_cast<char>(n + 0x20);
            }
            ++i;
        }
    }
    return out;
}

std::string normalize(std::string_view s) {
    std::string folded = casefold(trim(s));
    std::string out;
    out.reserve(folded.size());
    bool in_space = false;
    for (char ch : folded) {
        if (is_space(static_cast<unsigned char>(ch))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(ch);
    }
    return out;
}

std::vector<Token> tokenize_spans(std::string_view s,
                                  const std::unordered_set<std::string>* keep_whole) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        if (!is_word_byte(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        // Maximal run of word bytes and inner hyphens.
        std::size_t j = i;
        bool has_hyphen = false;
        while (j < n) {
            auto c = static_cast<unsigned char>(s[j]);
            if (is_word_byte(c)) {
                ++j;
            } else if (c == '-' && j + 1 < n &&
                       is_word_byte(static_cast<unsigned char>(s[j + 1]))) {
                has_hyphen = true;
                ++j;
            } else {
                break;
            }
        }
        if (has_hyphen && keep_whole != nullptr) {
            std::string whole = casefold(s.substr(i, j - i));
            if (keep_whole->count(whole) != 0) {
                tokens.push_back({std::move(whole), i, j});
                i = j;
                continue;
            }
        }
        std::size_t k = i;
        while (k < j) {
            std::size_t m = k;
            while (m < j && s[m] != '-') ++m;
            if (m > k) tokens.push_back({casefold(s.substr(k, m - k)), k, m});
            k = m + 1;
        }
        i = j;
    }
    return tokens;
}

std::vector<std::string> tokenize(std::string_view s,
                                  const std::unordered_set<std::string>* keep_whole) {
    std::vector<std::string> out;
    for (auto& t : tokenize_spans(s, keep_whole)) out.push_back(std::move(t.text));
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c != '.' && c != '!' && c != '?') continue;
        bool boundary = (i + 1 == s.size()) || is_space(static_cast<unsigned char>(s[i + 1]));
        if (!boundary) continue;
        std::string sentence = trim(s.substr(start, i + 1 - start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        start = i + 1;
    }
    std::string tail = trim(s.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace asag::text
