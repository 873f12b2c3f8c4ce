#pragma once

#include <complex>
#include <vector>

namespace frd::detail {

// In-place d-dimensional DCT-I (REDFT00), n points per axis, unnormalized.
void dct1(std::vector<double>& a, int d, int n);
// In-place d-dimensional DST-I (RODFT00), n points per axis, unnormalized.
void dst1(std::vector<double>& a, int d, int n);
// In-place unnormalized complex DFT, sign -1 forward, +1 backward.
void dft(std::vector<std::complex<double>>& a, int d, int n, int sign);

// out(k) = sum_{j in octant} w(j) in(j) prod_i cos(2 pi k_i j_i / M), k = 0..N-1,
// with w = prod of 1 at j_i in {0, M/2} and 2 otherwise.  in has n_in points per axis.
std::vector<double> cosine_sum(const std::vector<double>& in, int d, int n_in, int N, int M);

// Contract one axis of a row-major tensor with a dense table[out][in].
std::vector<double> contract_axis(const std::vector<double>& in, const std::vector<int>& dims, int axis,
                                  const std::vector<double>& table, int n_out);

} // namespace frd::detail
