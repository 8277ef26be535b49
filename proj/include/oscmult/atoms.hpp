#pragma once

#include "oscmult/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oscmult {

/// L1 atom: supported in B(center, radius) with radius <= 1 and
/// sup norm <= radius^{-dim}.
struct Atom {
    std::array<double, 2> center{0.0, 0.0};
    double radius = 1.0;
    SampledFunction samples;
};

struct AtomValidity {
    bool ok = true;
    std::string violation;
};

/// Support is checked with one grid-step slack; the size bound with a
/// round-off margin.
AtomValidity validate_atom(const Atom& atom);

struct AtomicDecomposition {
    std::vector<Atom> atoms;
    std::vector<double> weights;
    /// Sub-threshold residue carrying at most 1e-8 of the source L1 mass;
    /// included in reconstruction but not an atom.
    std::optional<SampledFunction> remainder;
    double source_l1 = 0.0;

    double weight_sum() const;
    SampledFunction reconstruct() const;
};

/// Level-set decomposition of a grid function into weighted atoms: level sets
/// E_k = {2^k <= |h| < 2^{k+1}} covered by dyadic cubes of diameter <= 1
/// anchored at the origin, refined until the cover volume is at most 2|E_k|.
/// Complex values ride inside the atoms; weights are 2^{k+1} r^dim.
AtomicDecomposition decompose(const SampledFunction& h);

} // namespace oscmult
