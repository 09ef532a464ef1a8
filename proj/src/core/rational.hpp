#pragma once

#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace soe {

// Exact arithmetic everywhere in the core.  Floating point only enters in
// the entropy report layer (see certified.hpp).
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Parses "3/8", "-1/2", "0", "7".
inline Rat parse_rat(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0)
    throw std::invalid_argument("not a rational: '" + s + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rat& q) { return q.get_str(); }

inline Rat abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

}  // namespace soe
