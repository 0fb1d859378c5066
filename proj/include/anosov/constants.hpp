#pragma once

// Numeric policy knobs shared across the library. Tolerances for "exact"
// linear-algebra identities live here so tests and the CLI agree on them.

namespace anosov {

// Identities that hold in exact arithmetic (Hodge involution, Eq.-style
// defining relations, deck gluing of analytic atoms).
inline constexpr double kAlgebraTol = 1e-12;

// Flow-level identities (group law, volume preservation, orbit closure).
inline constexpr double kFlowTol = 1e-10;

// An eigenvalue modulus closer to 1 than this is "not hyperbolic".
inline constexpr double kHyperbolicityMargin = 1e-9;

// Default step for central finite differences of Lie derivatives.
inline constexpr double kDefaultFdStep = 1e-4;

// Bump profiles are supported in [delta, 1-delta]; smallest allowed delta.
inline constexpr double kBumpMargin = 0.05;

// Case-split components with norm below this are dropped from the 2^k
// expansion (avoids 0 * huge noise at long horizons).
inline constexpr double kSplitDropTol = 1e-13;

}  // namespace anosov
