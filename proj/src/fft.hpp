#pragma once

#include <complex>
#include <vector>

namespace camfse::detail {

/// In-place unnormalized forward 3-D DFT, X[k] = sum x[i] exp(-j*2*pi*k.i/F).
/// The slowest axis has extent `slow`, the fastest `fast`.
void forward_dft_3d(std::vector<std::complex<double>>& data, int slow, int mid, int fast);

}  // namespace camfse::detail
