#pragma once

#include "leakscan/source.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace leakscan {

enum class TokenKind {
  End,
  Ident,
  Keyword,
  IntLit,
  CharLit,
  StringLit,
  // punctuators
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Semi, Comma, Colon, Question, Dot, Arrow,
  Star, Amp, Plus, Minus, Slash, Percent, Bang, Tilde, Pipe, Caret,
  PlusPlus, MinusMinus,
  Assign, PlusAssign, MinusAssign,
  EqEq, NotEq, Less, LessEq, Greater, GreaterEq,
  AmpAmp, PipePipe, Shl, Shr,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  Span span;

  bool is(TokenKind k) const { return kind == k; }
  bool is_keyword(std::string_view kw) const {
    return kind == TokenKind::Keyword && text == kw;
  }
  /// "Kw(int)", "Ident(p)", "Star", ...
  std::string debug() const;
};

bool is_keyword(std::string_view word);

/// Maximal-munch tokenizer. The result always ends with an End token.
std::vector<Token> tokenize(std::string_view source, FileId file);

} // namespace leakscan
