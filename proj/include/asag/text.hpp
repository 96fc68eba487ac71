#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace asag::text {

std::string trim(std::string_view s);

// ASCII plus the Latin-1 supplement block of UTF-8 (À..Þ) folded to lowercase.
std::string casefold(std::string_view s);

// Trim, casefold and collapse internal whitespace runs to a single space.
std::string normalize(std::string_view s);

struct Token {
    std::string text;    // case-folded
    std::size_t begin;   // byte offset into the source string
    std::size_t end;
};

// Splits on non-alphanumeric boundaries. Bytes >= 0x80 count as word
// characters so UTF-8 letters stay inside tokens. When `keep_whole` is given,
// hyphenated spans whose case-folded form is in the set are emitted as one token.
std::vector<Token> tokenize_spans(std::string_view s,
                                  const std::unordered_set<std::string>* keep_whole = nullptr);

std::vector<std::string> tokenize(std::string_view s,
                                  const std::unordered_set<std::string>* keep_whole = nullptr);

// Splits on '.', '!' or '?' followed by whitespace or end of input.
// Returned sentences are trimmed and never empty.
std::vector<std::string> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace asag::text
