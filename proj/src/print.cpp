#include "mpst/print.hpp"

#include <cctype>
#include <set>

namespace mpst {

namespace {

bool identifier_shaped(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

bool keyword(const std::string& s) {
  static const std::set<std::string> kw = {"new", "def", "in",   "rec",
                                          "end", "true", "false"};
  return kw.count(s) > 0;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct PrintCtx {
  std::set<Name> sessions;  // new-bound names in scope
};

std::string print_value(const Value& v, const PrintCtx& ctx) {
  if (const auto* sr = std::get_if<SessionRef>(&v)) return sr->name;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  const auto& text = std::get<StrVal>(v).text;
  // A bare identifier re-reads as Str unless it names a session in scope or a
  // keyword; quote in those cases to keep the round-trip faithful.
  if (identifier_shaped(text) && !keyword(text) && !ctx.sessions.count(text)) {
    return text;
  }
  return quoted(text);
}

std::string print_channel(const Channel& c) {
  return c.display();
}

std::string print_interval(const ImpreciseProb& d) {
  if (d.lo == d.hi) return rational_string(d.lo);
  return "[" + rational_string(d.lo) + ", " + rational_string(d.hi) + "]";
}

std::string print_global(const GlobalPtr& g);

std::string print_proc(const ProcPtr& p, PrintCtx ctx);

// Operand of a prefix position (new/def bodies, arm continuations): a parallel
// composition there needs parentheses.
std::string print_operand(const ProcPtr& p, const PrintCtx& ctx) {
  if (std::holds_alternative<PPar>(p->node)) {
    return "( " + print_proc(p, ctx) + " )";
  }
  return print_proc(p, ctx);
}

std::string print_proc(const ProcPtr& p, PrintCtx ctx) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PSelect>) {
          std::string s = print_channel(n.chan) + "[" + n.partner + "](+){ ";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += rational_string(a.prob) + ": " + a.label + "(" +
                 print_value(a.payload, ctx) + "). " + print_operand(a.cont, ctx);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, PBranch>) {
          std::string s = print_channel(n.chan) + "[" + n.partner + "]&{ ";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += a.label + "(" + a.binder + "). " + print_operand(a.cont, ctx);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, PRestrict>) {
          PrintCtx inner = ctx;
          inner.sessions.insert(n.session);
          std::string s = "new " + n.session;
          if (n.annotation) s += " : < " + print_global(n.annotation) + " >";
          return s + " . " + print_operand(n.body, inner);
        } else if constexpr (std::is_same_v<T, PDef>) {
          std::string s = "def " + n.name + "(";
          for (std::size_t i = 0; i < n.params.size(); ++i) {
            if (i) s += ", ";
            s += n.params[i];
          }
          s += ") = " + print_operand(n.body, ctx) + " in " +
               print_operand(n.scope, ctx);
          return s;
        } else if constexpr (std::is_same_v<T, PCall>) {
          std::string s = n.name + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) s += ", ";
            if (const auto* v = std::get_if<Value>(&n.args[i])) {
              s += print_value(*v, ctx);
            } else {
              s += print_channel(std::get<Channel>(n.args[i]));
            }
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, PNil>) {
          return "0";
        } else {
          // Right-associated chain prints flat; a left-nested Par needs parens.
          std::string left = std::holds_alternative<PPar>(n.left->node)
                                 ? "( " + print_proc(n.left, ctx) + " )"
                                 : print_proc(n.left, ctx);
          return left + " | " + print_proc(n.right, ctx);
        }
      },
      p->node);
}

std::string print_global(const GlobalPtr& g) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GInteraction>) {
          std::string s = n.from + " -> " + n.to + " { ";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += print_interval(a.delta) + ": " + a.label + "(" + sort_name(a.sort) +
                 "). " + print_global(a.cont);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, GRec>) {
          return "rec " + n.var + " . " + print_global(n.body);
        } else if constexpr (std::is_same_v<T, GVar>) {
          return n.name;
        } else {
          return "end";
        }
      },
      g->node);
}

std::string print_local(const LocalPtr& t) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LSelect>) {
          std::string s = n.partner + " (+) { ";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += print_interval(a.delta) + ": !" + a.label + "(" + sort_name(a.sort) +
                 "). " + print_local(a.cont);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, LBranch>) {
          std::string s = n.partner + " & { ";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += "?" + a.label + "(" + sort_name(a.sort) + "). " + print_local(a.cont);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, LRec>) {
          return "rec " + n.var + " . " + print_local(n.body);
        } else if constexpr (std::is_same_v<T, LVar>) {
          return n.name;
        } else {
          return "end";
        }
      },
      t->node);
}

std::string print_erased(const ErasedPtr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ESelect> || std::is_same_v<T, EBranch>) {
          const char* mark = std::is_same_v<T, ESelect> ? "!" : "?";
          std::string s =
              n.partner + (std::is_same_v<T, ESelect> ? " (+) { " : " & { ");
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            const auto& a = n.arms[i];
            if (i) s += ", ";
            s += std::string(mark) + a.label + "(" + sort_name(a.sort) + "). " +
                 print_erased(a.cont);
          }
          return s + " }";
        } else if constexpr (std::is_same_v<T, ERec>) {
          return "rec " + n.var + " . " + print_erased(n.body);
        } else if constexpr (std::is_same_v<T, EVar>) {
          return n.name;
        } else {
          return "end";
        }
      },
      e->node);
}

}  // namespace

std::string pretty_print(const ProcPtr& p) {
  return print_proc(p, PrintCtx{});
}
std::string pretty_print(const GlobalPtr& g) {
  return print_global(g);
}
std::string pretty_print(const LocalPtr& t) {
  return print_local(t);
}
std::string pretty_print(const ErasedPtr& e) {
  return print_erased(e);
}

}  // namespace mpst
