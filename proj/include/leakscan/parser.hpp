#pragma once

#include "leakscan/ast.hpp"
#include "leakscan/lexer.hpp"

#include <span>
#include <string>

namespace leakscan {

/// Recursive-descent parser for one translation unit. Local variables and
/// parameters are resolved here; globals and callees are left for
/// link_program. Throws ParseError on the first offending token.
Unit parse_unit(std::span<const Token> tokens, std::string path = {});

/// tokenize + parse_unit.
Unit parse_source(std::string_view source, FileId file, std::string path = {});

} // namespace leakscan
