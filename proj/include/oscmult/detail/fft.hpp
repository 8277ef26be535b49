#pragma once

#include "oscmult/grid.hpp"

#include <span>

namespace oscmult::detail {

/// In-place complex DFT over a row-major multi-dimensional array.
/// sign -1 is the e^{-2 pi i k m / N} direction. Plans are cached and
/// execution is thread safe on distinct buffers.
void dft(Complex* data, std::span<const std::size_t> dims, int sign);

} // namespace oscmult::detail
