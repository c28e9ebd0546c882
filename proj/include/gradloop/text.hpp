#pragma once

#include <string>
#include <vector>

namespace gradloop {

// Token proxy used everywhere (compression caps, brevity bonus, merge cap):
// whitespace-delimited word count. Model-tokenizer parity is out of scope;
// the proxy only has to be consistent.
int token_count(const std::string& text);

// Keeps at most max_tokens words, hard cut.
std::string truncate_tokens(const std::string& text, int max_tokens);

// Keeps at most max_tokens words, preferring the last sentence boundary
// ('.', '!' or '?') inside the window. Falls back to a hard cut.
std::string truncate_tokens_sentence(const std::string& text, int max_tokens);

// Action normalization for alignment accounting: lowercase, collapse
// whitespace runs, strip trailing punctuation.
std::string normalize_action(const std::string& action);

std::string to_lower(std::string s);
bool contains(const std::string& text, const std::string& needle);
bool contains_ci(const std::string& text, const std::string& needle);
std::string trim(const std::string& s);
std::vector<std::string> split_lines(const std::string& text);
std::string first_nonempty_line(const std::string& text);

}  // namespace gradloop
