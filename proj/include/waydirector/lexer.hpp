#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace waydirector {

// Error raised by the line lexer; line/column are 1-based.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

namespace lex {

// One whitespace-separated token of a directive line. A token is either a bare
// word, a quoted string, or a `key=value` pair whose value may be quoted.
struct Token {
  std::string key;    // empty for positional tokens
  std::string value;  // unquoted, escapes resolved
  bool quoted = false;
  int column = 1;

  bool is_pair() const { return !key.empty(); }
};

struct Line {
  int number = 0;
  std::vector<Token> tokens;
};

namespace detail {

inline std::string read_quoted(std::string_view text, std::size_t& pos, int line) {
  const int start_col = static_cast<int>(pos) + 1;
  ++pos;  // opening quote
  std::string out;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == '\\') {
      if (pos + 1 >= text.size()) throw SyntaxError(line, static_cast<int>(pos) + 1, "dangling escape");
      char next = text[pos + 1];
      if (next != '"' && next != '\\') {
        throw SyntaxError(line, static_cast<int>(pos) + 1, std::string("unknown escape \\") + next);
      }
      out.push_back(next);
      pos += 2;
      continue;
    }
    if (c == '"') {
      ++pos;
      return out;
    }
    out.push_back(c);
    ++pos;
  }
  throw SyntaxError(line, start_col, "unterminated string");
}

}  // namespace detail

// Splits one line into tokens. `#` starts a comment outside quotes.
inline Line tokenize_line(std::string_view text, int line_number) {
  Line line;
  line.number = line_number;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    Token tok;
    tok.column = static_cast<int>(pos) + 1;
    if (c == '"') {
      tok.value = detail::read_quoted(text, pos, line_number);
      tok.quoted = true;
    } else {
      std::size_t begin = pos;
      while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
             text[pos] != '=' && text[pos] != '"' && text[pos] != '#') {
        ++pos;
      }
      std::string word(text.substr(begin, pos - begin));
      if (pos < text.size() && text[pos] == '=') {
        if (word.empty()) throw SyntaxError(line_number, tok.column, "missing key before '='");
        ++pos;
        tok.key = std::move(word);
        if (pos < text.size() && text[pos] == '"') {
          tok.value = detail::read_quoted(text, pos, line_number);
          tok.quoted = true;
        } else {
          std::size_t vbegin = pos;
          while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
                 text[pos] != '#') {
            if (text[pos] == '"' || text[pos] == '=') {
              throw SyntaxError(line_number, static_cast<int>(pos) + 1,
                                std::string("unexpected '") + text[pos] + "' in value");
            }
            ++pos;
          }
          tok.value = std::string(text.substr(vbegin, pos - vbegin));
          if (tok.value.empty()) {
            throw SyntaxError(line_number, static_cast<int>(vbegin) + 1,
                              "missing value for '" + tok.key + "'");
          }
        }
      } else if (pos < text.size() && text[pos] == '"') {
        throw SyntaxError(line_number, static_cast<int>(pos) + 1, "unexpected quote");
      } else {
        tok.value = std::move(word);
      }
    }
    if (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) && text[pos] != '#') {
      throw SyntaxError(line_number, static_cast<int>(pos) + 1, "expected whitespace between tokens");
    }
    line.tokens.push_back(std::move(tok));
  }
  return line;
}

// Tokenizes a whole document, dropping blank and comment-only lines.
inline std::vector<Line> tokenize(std::string_view document) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    std::string_view raw = document.substr(pos, end - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++number;
    Line line = tokenize_line(raw, number);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == document.size()) break;
    pos = end + 1;
  }
  return lines;
}

// Quotes a value for output, escaping `"` and `\`.
inline std::string quote(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace lex
}  // namespace waydirector
