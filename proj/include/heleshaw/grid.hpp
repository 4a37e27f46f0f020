#ifndef HELESHAW_GRID_HPP
#define HELESHAW_GRID_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace heleshaw {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on [0,2pi)^dim, dim in {1,2}, with the integer
// wavenumber lattice [-n/2, n/2) per axis.  Nodes are x_j = 2*pi*j/n.
class TorusGrid {
 public:
  TorusGrid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  double cell_volume() const;

  // 2/3-rule cutoff: modes with any |k_i| > cutoff are aliasing-prone.
  int dealias_cutoff() const { return n_ / 3; }

  // Wavenumber of FFT bin b on one axis, in [-n/2, n/2).
  int wavenumber(int bin) const { return bin < n_ - bin ? bin : bin - n_; }

  std::size_t index(int i0, int i1 = 0) const {
    return dim_ == 1 ? static_cast<std::size_t>(i0)
                     : static_cast<std::size_t>(i0) * n_ + i1;
  }
  // Wavenumber vector of the flattened spectral index (k[1] = 0 in 1D).
  std::array<int, 2> wavenumbers(std::size_t flat) const;
  // Physical coordinates of the flattened node index (x[1] = 0 in 1D).
  std::array<double, 2> point(std::size_t flat) const;

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_;
  }

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

// Validates dim in {1,2} and n even with 8 <= n <= 4096.
GridPtr build_grid(int dim, int points_per_axis);

// Real multiplier symbol evaluated on the integer wavenumber lattice.
using Symbol = std::function<double(const std::array<int, 2>&)>;

namespace symbols {
Symbol abs_k();                // |k|, Euclidean; sends the zero mode to 0
Symbol abs_k_power(int p);     // |k|^p, p >= 1
Symbol neg_laplacian();        // |k|^2
Symbol laplacian();            // -|k|^2
}  // namespace symbols

// Real-valued periodic grid function with a lazily computed spectral side.
// Values are immutable through the public interface except via mutable_values(),
// which drops the cached spectrum; the lazy fill is mutex-guarded so const
// Fields can be shared across threads.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  Field(const Field& other);
  Field& operator=(const Field& other);
  Field(Field&& other) noexcept;
  Field& operator=(Field&& other) noexcept;

  static Field from_spectrum(GridPtr grid, std::vector<std::complex<double>> coeff);
  static Field sample(GridPtr grid,
                      const std::function<double(const std::array<double, 2>&)>& fn);

  bool empty() const { return !grid_; }
  const TorusGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values();
  double operator[](std::size_t i) const { return values_[i]; }

  // Trigonometric coefficients c_k with f(x) = sum_k c_k e^{i k.x}.
  std::shared_ptr<const std::vector<std::complex<double>>> spectrum() const;

  bool finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  mutable std::shared_ptr<const std::vector<std::complex<double>>> spectrum_;
  mutable std::mutex lock_;
};

// ---- spectral operations ----

// Multiplies the spectrum by symbol(k).  Throws on non-finite input.
Field apply_multiplier(const Field& f, const Symbol& symbol);

// Exact spectral differentiation; the Nyquist mode of odd-order derivatives
// is zeroed to keep real fields real.
std::vector<Field> gradient(const Field& f);
Field divergence(const std::vector<Field>& v);
Field laplacian_of(const Field& f);

// Uniform-weight quadrature, exact for trig polynomials below Nyquist.
double integrate(const Field& f);
double inner(const Field& f, const Field& g);  // integrate(f*g)

// Zeroes all modes with any |k_i| > n/3.
Field dealias(const Field& f);

// Dealias with a smooth high-order rolloff at the band edge: modes with
// r = max_i |k_i| / (n/3) near 1 are damped by exp(-37 r^60).  Repeated
// |D|-power applications amplify band-edge roundoff by (n/3)^p; the taper
// pins that band at roundoff while leaving r <= 0.8 unchanged to ~1e-12.
Field spectral_taper(const Field& f);

// Pointwise product followed by dealias (quadratic aliasing control).
Field multiply(const Field& f, const Field& g);

// Raw pointwise maps (no dealias); used for quadrature integrands and
// rational/transcendental expressions evaluated at nodes.
Field pointwise(const Field& f, const std::function<double(double)>& fn);
Field pointwise(const Field& f, const Field& g,
                const std::function<double(double, double)>& fn);

Field operator+(const Field& f, const Field& g);
Field operator-(const Field& f, const Field& g);
Field operator*(double s, const Field& f);
Field operator-(const Field& f);

double norm_l2(const Field& f);    // sqrt(integrate(f^2))
double norm_linf(const Field& f);  // max over nodes
double mean(const Field& f);

// Relative L2 distance ||f-g|| / max(||g||, floor).
double rel_l2_error(const Field& f, const Field& g, double floor = 1e-300);

// Deterministic band-limited sample: modes with 1 <= |k_i|, |k| <= kmax get
// Gaussian coefficients damped by decay^|k|, then the field is rescaled to
// the requested sup-norm amplitude.  amplitude 0 gives the zero field.
Field random_band_limited(GridPtr grid, int kmax, double decay, unsigned seed,
                          double amplitude);

// Single real Fourier mode amplitude*cos(k.x + phase).
Field cosine_mode(GridPtr grid, const std::array<int, 2>& k, double amplitude,
                  double phase = 0.0);

// Magnitude of the complex coefficient pair of mode k (amplitude of the
// corresponding real cosine is 2|c_k| for k != 0).
double mode_magnitude(const Field& f, const std::array<int, 2>& k);

void ensure_finite(const Field& f, const char* where);
void ensure_same_grid(const Field& f, const Field& g, const char* where);

}  // namespace heleshaw

#endif
