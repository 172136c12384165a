#pragma once

#include "mpst/ast.hpp"
#include "mpst/types.hpp"

#include <string>

namespace mpst {

// Deterministic single-line concrete syntax. parse_process(pretty_print(p))
// is struct_equal to p for parser-reachable terms; a free SessionRef value
// (never produced by the parser) prints bare and re-reads as Str.
std::string pretty_print(const ProcPtr& p);
std::string pretty_print(const GlobalPtr& g);
std::string pretty_print(const LocalPtr& t);
std::string pretty_print(const ErasedPtr& e);

}  // namespace mpst
