#ifndef HELESHAW_FFT_HPP
#define HELESHAW_FFT_HPP

#include <complex>
#include <vector>

namespace heleshaw::fft {

// In-place complex DFT on a periodic lattice with n points per axis
// (row-major for dim == 2).  forward() applies the 1/n^dim normalization,
// so the output entries are trigonometric-polynomial coefficients;
// backward() is the unnormalized inverse.
void forward(int dim, int n, std::vector<std::complex<double>>& data);
void backward(int dim, int n, std::vector<std::complex<double>>& data);

}  // namespace heleshaw::fft

#endif
