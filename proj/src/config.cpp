#include "asag/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <string>
#include <vector>

#include "asag/error.hpp"
#include "asag/hashing.hpp"

namespace asag {

namespace {

using nlohmann::json;

class TomlParser {
public:
    TomlParser(std::string_view text, std::string source) : s_(text), source_(std::move(source)) {}

    json parse() {
        json root = json::object();
        json* current = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                const bool array = peek(1) == '[';
                pos_ += array ? 2 : 1;
                skip_ws();
                auto path = key_path();
                skip_ws();
                expect(']');
                if (array) expect(']');
                end_of_line();
                current = array ? &open_array_table(root, path) : &open_table(root, path);
            } else {
                auto path = key_path();
                skip_ws();
                expect('=');
                skip_ws();
                assign(*current, path, value());
                end_of_line();
            }
        }
        return root;
    }

private:
    std::string_view s_;
    std::string source_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    bool eof() const { return pos_ >= s_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::Parse, source_ + ":" + std::to_string(line_) + ": " + what);
    }

    void expect(char c) {
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') ++pos_;
        }
    }

    bool newline() {
        if (peek() == '\r' && peek(1) == '\n') ++pos_;
        if (peek() == '\n') {
            ++pos_;
            ++line_;
            return true;
        }
        return false;
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (!newline()) break;
        }
    }

    // Whitespace, comments and newlines, as allowed inside arrays.
    void skip_array_space() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (!newline()) break;
        }
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (!eof() && !newline()) error("unexpected trailing characters");
    }

    static bool bare_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string key_part() {
        if (peek() == '"') return basic_string();
        if (peek() == '\'') return literal_string();
        const auto start = pos_;
        while (!eof() && bare_key_char(peek())) ++pos_;
        if (start == pos_) error("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> path{key_part()};
        while (true) {
            skip_ws();
            if (peek() != '.') break;
            ++pos_;
            skip_ws();
            path.push_back(key_part());
        }
        return path;
    }

    static void append_utf8(std::string& out, unsigned long cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') error("unterminated string");
            const char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                out += c;
                continue;
            }
            const char e = s_[pos_++];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u':
                case 'U': {
                    const std::size_t n = e == 'u' ? 4 : 8;
                    if (pos_ + n > s_.size()) error("truncated unicode escape");
                    const std::string hex(s_.substr(pos_, n));
                    for (char h : hex) {
                        if (!std::isxdigit(static_cast<unsigned char>(h))) error("bad unicode escape");
                    }
                    const unsigned long cp = std::strtoul(hex.c_str(), nullptr, 16);
                    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) error("invalid code point");
                    append_utf8(out, cp);
                    pos_ += n;
                    break;
                }
                default: error(std::string("unknown escape \\") + e);
            }
        }
        return out;
    }

    std::string literal_string() {
        expect('\'');
        const auto start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
        if (peek() != '\'') error("unterminated literal string");
        std::string out(s_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    json number() {
        const auto start = pos_;
        while (!eof()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
                ++pos_;
            } else {
                break;
            }
        }
        std::string raw(s_.substr(start, pos_ - start));
        std::string digits;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '_') {
                digits += raw[i];
                continue;
            }
            const bool ok = i > 0 && i + 1 < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i - 1])) &&
                            std::isdigit(static_cast<unsigned char>(raw[i + 1]));
            if (!ok) error("misplaced '_' in number '" + raw + "'");
        }
        if (digits.empty()) error("expected a value");
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        char* end = nullptr;
        errno = 0;
        if (is_float) {
            const double v = std::strtod(digits.c_str(), &end);
            if (*end != '\0' || errno == ERANGE) error("bad float '" + raw + "'");
            return v;
        }
        const long long v = std::strtoll(digits.c_str(), &end, 10);
        if (*end != '\0' || errno == ERANGE) error("bad value '" + raw + "'");
        return v;
    }

    json array() {
        expect('[');
        json out = json::array();
        while (true) {
            skip_array_space();
            if (peek() == ']') {
                ++pos_;
                return out;
            }
            out.push_back(value());
            skip_array_space();
            if (peek() == ',') {
                ++pos_;
            } else if (peek() != ']') {
                error("expected ',' or ']' in array");
            }
        }
    }

    json inline_table() {
        expect('{');
        json out = json::object();
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return out;
        }
        while (true) {
            skip_ws();
            auto path = key_path();
            skip_ws();
            expect('=');
            skip_ws();
            assign(out, path, value());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect('}');
            return out;
        }
    }

    json value() {
        const char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') return array();
        if (c == '{') return inline_table();
        if (s_.substr(pos_, 4) == "true" && !bare_key_char(peek(4))) {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "false" && !bare_key_char(peek(5))) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    json& descend(json& node, const std::string& key) {
        json& child = node[key];
        if (child.is_null()) child = json::object();
        if (child.is_array() && !child.empty() && child.back().is_object()) return child.back();
        if (!child.is_object()) error("key '" + key + "' is not a table");
        return child;
    }

    void assign(json& table, const std::vector<std::string>& path, json v) {
        json* node = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
        if (node->contains(path.back())) error("duplicate key '" + path.back() + "'");
        (*node)[path.back()] = std::move(v);
    }

    json& open_table(json& root, const std::vector<std::string>& path) {
        json* node = &root;
        for (const auto& key : path) node = &descend(*node, key);
        return *node;
    }

    json& open_array_table(json& root, const std::vector<std::string>& path) {
        json* node = &root;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
        json& arr = (*node)[path.back()];
        if (arr.is_null()) arr = json::array();
        if (!arr.is_array()) error("key '" + path.back() + "' is not an array of tables");
        arr.push_back(json::object());
        return arr.back();
    }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text, const std::string& source_name) {
    return TomlParser(text, source_name).parse();
}

nlohmann::json load_config(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    const auto text = read_file(path);
    if (ext == ".toml") return parse_toml(text, path.string());
    if (ext == ".json") {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, path.string() + ": " + e.what());
        }
    }
    fail(ErrorCode::InvalidArgument, path.string() + ": config must end in .toml or .json");
}

void merge_config(nlohmann::json& base, const nlohmann::json& overrides) {
    if (!base.is_object() || !overrides.is_object()) {
        base = overrides;
        return;
    }
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (base.contains(it.key())) {
            merge_config(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

}  // namespace asag
