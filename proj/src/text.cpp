#include "gradloop/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace gradloop {

namespace {

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

bool ends_sentence(const std::string& w) {
    if (w.empty()) return false;
    char c = w.back();
    return c == '.' || c == '!' || c == '?';
}

}  // namespace

int token_count(const std::string& text) {
    return static_cast<int>(words(text).size());
}

std::string truncate_tokens(const std::string& text, int max_tokens) {
    auto ws = words(text);
    if (static_cast<int>(ws.size()) <= max_tokens) return text;
    std::string out;
    for (int i = 0; i < max_tokens; ++i) {
        if (i) out += ' ';
        out += ws[i];
    }
    return out;
}

std::string truncate_tokens_sentence(const std::string& text, int max_tokens) {
    auto ws = words(text);
    if (static_cast<int>(ws.size()) <= max_tokens) return text;
    int cut = -1;
    for (int i = 0; i < max_tokens; ++i) {
        if (ends_sentence(ws[i])) cut = i;
    }
    int end = cut >= 0 ? cut + 1 : max_tokens;
    std::string out;
    for (int i = 0; i < end; ++i) {
        if (i) out += ' ';
        out += ws[i];
    }
    return out;
}

std::string normalize_action(const std::string& action) {
    std::string s = to_lower(action);
    std::string out;
    bool in_space = true;  // also strips leading whitespace
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += c;
            in_space = false;
        }
    }
    while (!out.empty() &&
           (out.back() == ' ' || std::ispunct(static_cast<unsigned char>(out.back())))) {
        out.pop_back();
    }
    return out;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

bool contains_ci(const std::string& text, const std::string& needle) {
    return contains(to_lower(text), to_lower(needle));
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string first_nonempty_line(const std::string& text) {
    for (const auto& line : split_lines(text)) {
        auto t = trim(line);
        if (!t.empty()) return t;
    }
    return "";
}

}  // namespace gradloop
