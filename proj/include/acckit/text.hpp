#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "acckit/ir.hpp"

// Textual form of the IR.
//
// Quick reference (whitespace-insensitive, `//` comments to end of line):
//
//   program    ::= accel-decl* func*
//   accel-decl ::= 'accel' '"' name '"'
//   func       ::= 'func' '@' ident '(' ')' '{' op* '}'
//
//   op         ::= (value-list '=')? body
//   body       ::= 'const' int ':' int-type
//                | arith-op value ',' value ':' int-type
//                | 'setup' '"' name '"' '(' writes? ')' ('from' value)?
//                      ':' state-type
//                | 'launch' value ('(' writes? ')')? 'ops' '=' (value | int)
//                      ':' token-type
//                | 'await' value
//                | 'for' value '=' int 'to' int 'step' int
//                      ('iter' '(' iter-binds ')')? '{' op* '}' (':' types)?
//                | 'if' value '{' op* '}' 'else' '{' op* '}' (':' types)?
//                | 'yield' value-list?
//                | 'extern-call' '"' name '"' '(' value-list? ')'
//                      ('effects' '=' ('all'|'none'))? (':' types)?
//                | 'host-work' 'cycles' '=' int
//   writes     ::= ident '=' value (',' ident '=' value)*
//   iter-binds ::= value '=' value ':' type (',' ...)*      // arg = init
//   arith-op   ::= 'add'|'sub'|'mul'|'and'|'or'|'xor'|'shl'|'shr'
//   type       ::= 'i' int | 'state<"' name '">' | 'token<"' name '">'
//   value      ::= '%' ident
//
// The induction variable of a `for` is i64. Regions of for/if must end in a
// `yield`; the parser inserts an empty one when it is missing. print_program
// renumbers values %0, %1, ... in order of textual appearance and its output
// reparses to a structurally equal program.

namespace acckit {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string &msg)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line), col(col) {}
};

Program parse_program(std::string_view text);

std::string print_program(const Program &p);

} // namespace acckit
