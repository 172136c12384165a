#pragma once

#include "mpst/ast.hpp"
#include "mpst/types.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace mpst {

// Parse failure with 1-based source position. kind is a stable slug tests and
// tools can match on: "syntax", "duplicate-label", "empty-choice",
// "bad-interval", "bad-probability", "unbound-type-var",
// "unguarded-recursion", "self-communication", "annotation", "file".
struct ParseError : std::runtime_error {
  ParseError(std::string kind_, int line_, int col_, const std::string& detail)
      : std::runtime_error(kind_ + " at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + detail),
        kind(std::move(kind_)),
        line(line_),
        col(col_) {}
  std::string kind;
  int line;
  int col;
};

struct ParseOptions {
  // Base directory for resolving "file.gty" annotations.
  std::string base_dir = ".";
  // Override for annotation loading; receives the reference text as written.
  std::function<std::string(const std::string&)> file_loader;
};

// Processes. Annotations on restrictions are resolved eagerly: a quoted file
// reference loads and parses the referenced global type, an inline < ... >
// annotation parses in place.
ProcPtr parse_process(const std::string& text, const ParseOptions& opts = {});

// Global types (the .gty syntax).
GlobalPtr parse_global_type(const std::string& text);

}  // namespace mpst
