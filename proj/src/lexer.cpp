#include "leakscan/lexer.hpp"

#include <array>
#include <cctype>

namespace leakscan {

namespace {

constexpr std::array kKeywords = {
    "int",    "char",    "void",   "long",   "short",  "unsigned", "signed",
    "const",  "static",  "extern", "struct", "typedef", "if",      "else",
    "while",  "for",     "switch", "case",   "default", "goto",    "return",
    "break",  "continue", "sizeof", "NULL",
};

struct Punct {
  std::string_view text;
  TokenKind kind;
};

// Longest spellings first so the scan is maximal munch.
constexpr std::array kPuncts = {
    Punct{"->", TokenKind::Arrow},      Punct{"++", TokenKind::PlusPlus},
    Punct{"--", TokenKind::MinusMinus}, Punct{"+=", TokenKind::PlusAssign},
    Punct{"-=", TokenKind::MinusAssign}, Punct{"==", TokenKind::EqEq},
    Punct{"!=", TokenKind::NotEq},      Punct{"<=", TokenKind::LessEq},
    Punct{">=", TokenKind::GreaterEq},  Punct{"&&", TokenKind::AmpAmp},
    Punct{"||", TokenKind::PipePipe},   Punct{"<<", TokenKind::Shl},
    Punct{">>", TokenKind::Shr},        Punct{"(", TokenKind::LParen},
    Punct{")", TokenKind::RParen},      Punct{"{", TokenKind::LBrace},
    Punct{"}", TokenKind::RBrace},      Punct{"[", TokenKind::LBracket},
    Punct{"]", TokenKind::RBracket},    Punct{";", TokenKind::Semi},
    Punct{",", TokenKind::Comma},       Punct{":", TokenKind::Colon},
    Punct{"?", TokenKind::Question},    Punct{".", TokenKind::Dot},
    Punct{"*", TokenKind::Star},        Punct{"&", TokenKind::Amp},
    Punct{"+", TokenKind::Plus},        Punct{"-", TokenKind::Minus},
    Punct{"/", TokenKind::Slash},       Punct{"%", TokenKind::Percent},
    Punct{"!", TokenKind::Bang},        Punct{"~", TokenKind::Tilde},
    Punct{"|", TokenKind::Pipe},        Punct{"^", TokenKind::Caret},
    Punct{"=", TokenKind::Assign},      Punct{"<", TokenKind::Less},
    Punct{">", TokenKind::Greater},
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

bool is_keyword(std::string_view word) {
  for (auto kw : kKeywords)
    if (word == kw)
      return true;
  return false;
}

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
  case TokenKind::End: return "End";
  case TokenKind::Ident: return "Ident";
  case TokenKind::Keyword: return "Kw";
  case TokenKind::IntLit: return "Int";
  case TokenKind::CharLit: return "Char";
  case TokenKind::StringLit: return "String";
  case TokenKind::LParen: return "LParen";
  case TokenKind::RParen: return "RParen";
  case TokenKind::LBrace: return "LBrace";
  case TokenKind::RBrace: return "RBrace";
  case TokenKind::LBracket: return "LBracket";
  case TokenKind::RBracket: return "RBracket";
  case TokenKind::Semi: return "Semi";
  case TokenKind::Comma: return "Comma";
  case TokenKind::Colon: return "Colon";
  case TokenKind::Question: return "Question";
  case TokenKind::Dot: return "Dot";
  case TokenKind::Arrow: return "Arrow";
  case TokenKind::Star: return "Star";
  case TokenKind::Amp: return "Amp";
  case TokenKind::Plus: return "Plus";
  case TokenKind::Minus: return "Minus";
  case TokenKind::Slash: return "Slash";
  case TokenKind::Percent: return "Percent";
  case TokenKind::Bang: return "Bang";
  case TokenKind::Tilde: return "Tilde";
  case TokenKind::Pipe: return "Pipe";
  case TokenKind::Caret: return "Caret";
  case TokenKind::PlusPlus: return "PlusPlus";
  case TokenKind::MinusMinus: return "MinusMinus";
  case TokenKind::Assign: return "Assign";
  case TokenKind::PlusAssign: return "PlusAssign";
  case TokenKind::MinusAssign: return "MinusAssign";
  case TokenKind::EqEq: return "EqEq";
  case TokenKind::NotEq: return "NotEq";
  case TokenKind::Less: return "Less";
  case TokenKind::LessEq: return "LessEq";
  case TokenKind::Greater: return "Greater";
  case TokenKind::GreaterEq: return "GreaterEq";
  case TokenKind::AmpAmp: return "AmpAmp";
  case TokenKind::PipePipe: return "PipePipe";
  case TokenKind::Shl: return "Shl";
  case TokenKind::Shr: return "Shr";
  }
  return "?";
}

std::string Token::debug() const {
  std::string name(token_kind_name(kind));
  switch (kind) {
  case TokenKind::Ident:
  case TokenKind::Keyword:
  case TokenKind::IntLit:
  case TokenKind::CharLit:
  case TokenKind::StringLit:
    return name + "(" + text + ")";
  default:
    return name;
  }
}

std::vector<Token> tokenize(std::string_view src, FileId file) {
  std::vector<Token> out;
  std::uint32_t i = 0;
  const auto n = static_cast<std::uint32_t>(src.size());

  auto span = [&](std::uint32_t start, std::uint32_t end) {
    return Span{file, start, end - start};
  };
  auto push = [&](TokenKind kind, std::uint32_t start, std::uint32_t end) {
    out.push_back(Token{kind, std::string(src.substr(start, end - start)),
                        span(start, end)});
  };

  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n')
        ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      std::uint32_t start = i;
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/'))
        ++i;
      if (i + 1 >= n)
        throw LexError("unterminated comment", span(start, n));
      i += 2;
      continue;
    }
    std::uint32_t start = i;
    if (ident_start(c)) {
      while (i < n && ident_char(src[i]))
        ++i;
      std::string_view word = src.substr(start, i - start);
      push(is_keyword(word) ? TokenKind::Keyword : TokenKind::Ident, start,
           i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
        i += 2;
        while (i < n && std::isxdigit(static_cast<unsigned char>(src[i])))
          ++i;
      } else {
        while (i < n && std::isdigit(static_cast<unsigned char>(src[i])))
          ++i;
      }
      // integer suffixes
      while (i < n && (src[i] == 'u' || src[i] == 'U' || src[i] == 'l' ||
                       src[i] == 'L'))
        ++i;
      if (i < n && ident_char(src[i]))
        throw LexError("malformed integer literal", span(start, i + 1));
      push(TokenKind::IntLit, start, i);
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      ++i;
      while (i < n && src[i] != quote && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n)
          ++i;
        ++i;
      }
      if (i >= n || src[i] != quote)
        throw LexError(quote == '"' ? "unterminated string literal"
                                    : "unterminated character literal",
                       span(start, i));
      ++i;
      push(quote == '"' ? TokenKind::StringLit : TokenKind::CharLit, start,
           i);
      continue;
    }
    bool matched = false;
    for (const Punct &p : kPuncts) {
      if (src.substr(i, p.text.size()) == p.text) {
        i += static_cast<std::uint32_t>(p.text.size());
        push(p.kind, start, i);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw LexError(std::string("illegal character '") + c + "'",
                     span(start, start + 1));
  }
  out.push_back(Token{TokenKind::End, "", span(n, n)});
  return out;
}

} // namespace leakscan
