#pragma once

// Reading and writing tensor series.
//
// Two on-disk forms share one logical layout (shape header, then T tensors
// flat in first-index-fastest order):
//
//   * binary (default): magic "TFMS", u32 version (currently 1), u32 order,
//     u32 length, u32 extents[order], then length * prod(extents) doubles,
//     all little-endian.
//   * CSV (chosen when the path ends in ".csv"): a header line
//     "length,order,d1,...,dK" followed by one line per time point holding
//     the flat tensor entries, '.' decimal, round-trip precision.

#include <string>

#include "tfm/tensor.hpp"

namespace tfm {

void write_series(const TensorSeries& series, const std::string& path);
TensorSeries read_series(const std::string& path);

}  // namespace tfm
