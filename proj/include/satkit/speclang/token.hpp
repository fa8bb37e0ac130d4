#ifndef SATKIT_SPECLANG_TOKEN_HPP
#define SATKIT_SPECLANG_TOKEN_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "satkit/util/rational.hpp"

namespace satkit::spec {

enum class Tok {
  Ident,
  Number,
  String,
  Comment,   // text after '#', excluding the '#'
  Newline,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Assign,    // =
  Eq,        // ==
  Ne,        // !=
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // identifier / string body / comment body
  Rat num;           // Number
  int line = 1;
  int col = 1;
};

struct LexError : std::runtime_error {
  int line, col;
  std::string snippet;
  LexError(int line_, int col_, std::string snippet_)
      : std::runtime_error("lex error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + " near '" + snippet_ + "'"),
        line(line_), col(col_), snippet(std::move(snippet_)) {}
};

namespace detail {
inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }
}  // namespace detail

/// Splits raw spec text into tokens. Line structure is preserved via Newline
/// tokens since the grammar is line-oriented. Throws LexError on bytes that
/// cannot start any token.
inline std::vector<Token> tokenize(const std::string& source) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  const size_t n = source.size();
  auto push = [&](Tok k, std::string text = "", Rat num = Rat(0)) {
    out.push_back(Token{k, std::move(text), std::move(num), line, col});
  };
  while (i < n) {
    char c = source[i];
    if (c == '\r') {  // normalize CRLF / lone CR to a single newline
      push(Tok::Newline);
      ++i;
      if (i < n && source[i] == '\n') ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == '\n') {
      push(Tok::Newline);
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      size_t j = i + 1;
      while (j < n && source[j] != '\n' && source[j] != '\r') ++j;
      push(Tok::Comment, source.substr(i + 1, j - i - 1));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      size_t j = i + 1;
      while (j < n && source[j] != quote && source[j] != '\n' && source[j] != '\r') ++j;
      if (j >= n || source[j] != quote)
        throw LexError(line, col, source.substr(i, std::min<size_t>(8, n - i)));
      push(Tok::String, source.substr(i + 1, j - i - 1));
      col += static_cast<int>(j - i + 1);
      i = j + 1;
      continue;
    }
    if (detail::digit(c) || (c == '.' && i + 1 < n && detail::digit(source[i + 1]))) {
      size_t j = i;
      while (j < n && detail::digit(source[j])) ++j;
      if (j < n && source[j] == '.' && j + 1 < n && detail::digit(source[j + 1])) {
        ++j;
        while (j < n && detail::digit(source[j])) ++j;
      }
      std::string text = source.substr(i, j - i);
      auto v = parse_rational(text);
      if (!v) throw LexError(line, col, text);
      push(Tok::Number, text, *v);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (detail::ident_start(c)) {
      size_t j = i;
      while (j < n && detail::ident_char(source[j])) ++j;
      push(Tok::Ident, source.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < n && source[i + 1] == b; };
    if (two('=', '=')) { push(Tok::Eq); i += 2; col += 2; continue; }
    if (two('!', '=')) { push(Tok::Ne); i += 2; col += 2; continue; }
    if (two('<', '=')) { push(Tok::Le); i += 2; col += 2; continue; }
    if (two('>', '=')) { push(Tok::Ge); i += 2; col += 2; continue; }
    Tok single;
    switch (c) {
      case '(': single = Tok::LParen; break;
      case ')': single = Tok::RParen; break;
      case '[': single = Tok::LBracket; break;
      case ']': single = Tok::RBracket; break;
      case ',': single = Tok::Comma; break;
      case ':': single = Tok::Colon; break;
      case '=': single = Tok::Assign; break;
      case '<': single = Tok::Lt; break;
      case '>': single = Tok::Gt; break;
      case '+': single = Tok::Plus; break;
      case '-': single = Tok::Minus; break;
      case '*': single = Tok::Star; break;
      case '/': single = Tok::Slash; break;
      default:
        throw LexError(line, col, source.substr(i, std::min<size_t>(8, n - i)));
    }
    push(single);
    ++i;
    ++col;
  }
  push(Tok::End);
  return out;
}

}  // namespace satkit::spec

#endif  // SATKIT_SPECLANG_TOKEN_HPP
