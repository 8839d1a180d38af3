/**
 * test_support.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Shared helpers for the unit and acceptance tests.
 */

#ifndef PGK_TESTS_TEST_SUPPORT_H_
#define PGK_TESTS_TEST_SUPPORT_H_

#include <string>
#include <vector>

#include "pgk/grounding.h"
#include "pgk/logic.h"
#include "pgk/util.h"

namespace pgk::testing {

inline std::string SourcePath(const std::string& relative) {
  return std::string(PGK_SOURCE_DIR) + "/" + relative;
}

// Ground atom over proposition p of a single dummy predicate.
inline Formula Prop(size_t p) {
  return Formula::GroundAtom(0, {static_cast<ObjectId>(p)}, p);
}

/**
 * Random quantifier-free formula over n propositions: atoms, negations,
 * conjunctions and disjunctions up to `depth` levels, with the occasional
 * implication.
 */
inline Formula RandomFormula(Rng& rng, size_t n, int depth) {
  if (depth == 0 || UniformInt(rng, 4) == 0) {
    Formula atom = Prop(UniformInt(rng, n));
    return UniformInt(rng, 3) == 0 ? Formula::Not(atom) : atom;
  }
  switch (UniformInt(rng, 5)) {
    case 0:
      return Formula::Not(RandomFormula(rng, n, depth - 1));
    case 1:
      return Formula::Imply(RandomFormula(rng, n, depth - 1),
                            RandomFormula(rng, n, depth - 1));
    default: {
      std::vector<Formula> children;
      const size_t k = 2 + UniformInt(rng, 2);
      for (size_t i = 0; i < k; ++i) children.push_back(RandomFormula(rng, n, depth - 1));
      return UniformInt(rng, 2) == 0 ? Formula::And(std::move(children))
                                     : Formula::Or(std::move(children));
    }
  }
}

// Closed state whose bits are the binary digits of `code`.
inline ClosedState StateFromCode(size_t n, uint64_t code) {
  ClosedState s(n);
  for (size_t p = 0; p < n; ++p) {
    if ((code >> p) & 1) s.Set(p);
  }
  return s;
}

inline PartialState Literals(size_t n, const std::vector<size_t>& pos,
                             const std::vector<size_t>& neg) {
  PartialState s(n);
  for (size_t p : pos) s.AddPositive(p);
  for (size_t p : neg) s.AddNegative(p);
  return s;
}

}  // namespace pgk::testing

#endif  // PGK_TESTS_TEST_SUPPORT_H_
