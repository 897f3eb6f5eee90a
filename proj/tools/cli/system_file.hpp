#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "deadbeat/linear_deadbeat.hpp"

namespace deadbeat::cli {

// JSON system description:
//   { "n": 2, "m": 1,
//     "A": [a11, a12, a21, a22],      row-major, n*n entries
//     "B": [b1, b2],                  row-major, n*m entries
//     "form": "factored" }            or "standard"; optional, default factored
// Errors are InvalidInput with the offending field named in the message.
LinearSystem parse_system(std::istream& in);
LinearSystem load_system(const std::string& path);

// Whitespace-separated rows; blank lines and '#' comments are skipped.
Matrix parse_matrix_text(std::istream& in);
Matrix load_matrix_text(const std::string& path);

// "1,2.5,-3" -> vector. Throws InvalidInput on malformed text.
Vector parse_vector(const std::string& text);

// DEADBEAT_TOL accepts "rank_rel" or "rank_rel,residual_rel".
Tolerance tolerance_from_env(const char* value, Tolerance base = {});

}  // namespace deadbeat::cli
