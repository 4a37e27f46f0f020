#include "heleshaw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "heleshaw/fft.hpp"

namespace heleshaw {

TorusGrid::TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
  if (dim_ != 1 && dim_ != 2)
    throw std::invalid_argument("TorusGrid: dim must be 1 or 2");
  if (n_ % 2 != 0 || n_ < 8 || n_ > 4096)
    throw std::invalid_argument("TorusGrid: points per axis must be even and in [8,4096]");
  size_ = (dim_ == 1) ? static_cast<std::size_t>(n_)
                      : static_cast<std::size_t>(n_) * n_;
}

double TorusGrid::cell_volume() const {
  const double w = kTwoPi / n_;
  return dim_ == 1 ? w : w * w;
}

std::array<int, 2> TorusGrid::wavenumbers(std::size_t flat) const {
  if (dim_ == 1) return {wavenumber(static_cast<int>(flat)), 0};
  const int b0 = static_cast<int>(flat / n_);
  const int b1 = static_cast<int>(flat % n_);
  return {wavenumber(b0), wavenumber(b1)};
}

std::array<double, 2> TorusGrid::point(std::size_t flat) const {
  const double h = spacing();
  if (dim_ == 1) return {h * static_cast<double>(flat), 0.0};
  return {h * static_cast<double>(flat / n_), h * static_cast<double>(flat % n_)};
}

GridPtr build_grid(int dim, int points_per_axis) {
  return std::make_shared<const TorusGrid>(dim, points_per_axis);
}

namespace symbols {

Symbol abs_k() {
  return [](const std::array<int, 2>& k) {
    return std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
  };
}

Symbol abs_k_power(int p) {
  if (p < 1) throw std::invalid_argument("abs_k_power: p must be >= 1");
  return [p](const std::array<int, 2>& k) {
    const double a = std::hypot(static_cast<double>(k[0]), static_cast<double>(k[1]));
    return std::pow(a, p);
  };
}

Symbol neg_laplacian() {
  return [](const std::array<int, 2>& k) {
    return static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
  };
}

Symbol laplacian() {
  return [](const std::array<int, 2>& k) {
    return -(static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1]);
  };
}

}  // namespace symbols

Field::Field(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::invalid_argument("Field: value count does not match grid");
}

Field::Field(const Field& other) : grid_(other.grid_), values_(other.values_) {
  std::lock_guard<std::mutex> lock(other.lock_);
  spectrum_ = other.spectrum_;
}

Field& Field::operator=(const Field& other) {
  if (this == &other) return *this;
  grid_ = other.grid_;
  values_ = other.values_;
  std::lock_guard<std::mutex> lock(other.lock_);
  spectrum_ = other.spectrum_;
  return *this;
}

Field::Field(Field&& other) noexcept
    : grid_(std::move(other.grid_)), values_(std::move(other.values_)) {
  std::lock_guard<std::mutex> lock(other.lock_);
  spectrum_ = std::move(other.spectrum_);
}

Field& Field::operator=(Field&& other) noexcept {
  if (this == &other) return *this;
  grid_ = std::move(other.grid_);
  values_ = std::move(other.values_);
  std::scoped_lock lock(lock_, other.lock_);
  spectrum_ = std::move(other.spectrum_);
  return *this;
}

Field Field::from_spectrum(GridPtr grid, std::vector<std::complex<double>> coeff) {
  if (coeff.size() != grid->size())
    throw std::invalid_argument("Field::from_spectrum: coefficient count mismatch");
  auto cached = std::make_shared<const std::vector<std::complex<double>>>(coeff);
  fft::backward(grid->dim(), grid->n(), coeff);
  std::vector<double> values(coeff.size());
  for (std::size_t i = 0; i < coeff.size(); ++i) values[i] = coeff[i].real();
  Field f(std::move(grid), std::move(values));
  f.spectrum_ = std::move(cached);
  return f;
}

Field Field::sample(GridPtr grid,
                    const std::function<double(const std::array<double, 2>&)>& fn) {
  std::vector<double> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(grid->point(i));
  return Field(std::move(grid), std::move(values));
}

std::vector<double>& Field::mutable_values() {
  std::lock_guard<std::mutex> lock(lock_);
  spectrum_.reset();
  return values_;
}

std::shared_ptr<const std::vector<std::complex<double>>> Field::spectrum() const {
  {
    std::lock_guard<std::mutex> lock(lock_);
    if (spectrum_) return spectrum_;
  }
  auto coeff = std::make_shared<std::vector<std::complex<double>>>(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) (*coeff)[i] = values_[i];
  fft::forward(grid_->dim(), grid_->n(), *coeff);
  std::lock_guard<std::mutex> lock(lock_);
  if (!spectrum_) spectrum_ = std::move(coeff);
  return spectrum_;
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void ensure_finite(const Field& f, const char* where) {
  if (f.empty()) throw std::invalid_argument(std::string(where) + ": empty field");
  if (!f.finite())
    throw std::invalid_argument(std::string(where) + ": non-finite input values");
}

void ensure_same_grid(const Field& f, const Field& g, const char* where) {
  if (f.empty() || g.empty() || !(f.grid() == g.grid()))
    throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

Field apply_multiplier(const Field& f, const Symbol& symbol) {
  ensure_finite(f, "apply_multiplier");
  const TorusGrid& g = f.grid();
  auto coeff = *f.spectrum();
  for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] *= symbol(g.wavenumbers(i));
  return Field::from_spectrum(f.grid_ptr(), std::move(coeff));
}

namespace {

// d/dx_axis in spectral space: multiply by i*k, Nyquist mode zeroed.
Field derivative(const Field& f, int axis) {
  const TorusGrid& g = f.grid();
  auto coeff = *f.spectrum();
  const int nyquist = -g.n() / 2;
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    const int k = g.wavenumbers(i)[axis];
    coeff[i] = (k == nyquist) ? 0.0 : coeff[i] * std::complex<double>(0.0, k);
  }
  return Field::from_spectrum(f.grid_ptr(), std::move(coeff));
}

}  // namespace

std::vector<Field> gradient(const Field& f) {
  ensure_finite(f, "gradient");
  std::vector<Field> out;
  out.reserve(f.grid().dim());
  for (int a = 0; a < f.grid().dim(); ++a) out.push_back(derivative(f, a));
  return out;
}

Field divergence(const std::vector<Field>& v) {
  if (v.empty()) throw std::invalid_argument("divergence: empty component list");
  const int dim = v.front().grid().dim();
  if (static_cast<int>(v.size()) != dim)
    throw std::invalid_argument("divergence: component count must equal dim");
  ensure_finite(v[0], "divergence");
  Field out = derivative(v[0], 0);
  for (int a = 1; a < dim; ++a) {
    ensure_same_grid(v[0], v[a], "divergence");
    ensure_finite(v[a], "divergence");
    out = out + derivative(v[a], a);
  }
  return out;
}

Field laplacian_of(const Field& f) { return apply_multiplier(f, symbols::laplacian()); }

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  const double avg = sum / static_cast<double>(f.values().size());
  const double vol = f.grid().dim() == 1 ? kTwoPi : kTwoPi * kTwoPi;
  return avg * vol;
}

double inner(const Field& f, const Field& g) {
  ensure_same_grid(f, g, "inner");
  double sum = 0.0;
  const auto& a = f.values();
  const auto& b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum / static_cast<double>(a.size()) *
         (f.grid().dim() == 1 ? kTwoPi : kTwoPi * kTwoPi);
}

Field dealias(const Field& f) {
  const TorusGrid& g = f.grid();
  const int cut = g.dealias_cutoff();
  auto coeff = *f.spectrum();
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    const auto k = g.wavenumbers(i);
    if (std::abs(k[0]) > cut || std::abs(k[1]) > cut) coeff[i] = 0.0;
  }
  return Field::from_spectrum(f.grid_ptr(), std::move(coeff));
}

Field spectral_taper(const Field& f) {
  const TorusGrid& g = f.grid();
  const double cut = g.dealias_cutoff();
  auto coeff = *f.spectrum();
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    const auto k = g.wavenumbers(i);
    const double r = std::max(std::abs(k[0]), std::abs(k[1])) / cut;
    coeff[i] = (r > 1.0) ? 0.0 : coeff[i] * std::exp(-37.0 * std::pow(r, 60));
  }
  return Field::from_spectrum(f.grid_ptr(), std::move(coeff));
}

Field multiply(const Field& f, const Field& g) {
  ensure_same_grid(f, g, "multiply");
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f[i] * g[i];
  return dealias(Field(f.grid_ptr(), std::move(values)));
}

Field pointwise(const Field& f, const std::function<double(double)>& fn) {
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(f[i]);
  return Field(f.grid_ptr(), std::move(values));
}

Field pointwise(const Field& f, const Field& g,
                const std::function<double(double, double)>& fn) {
  ensure_same_grid(f, g, "pointwise");
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(f[i], g[i]);
  return Field(f.grid_ptr(), std::move(values));
}

Field operator+(const Field& f, const Field& g) {
  ensure_same_grid(f, g, "operator+");
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f[i] + g[i];
  return Field(f.grid_ptr(), std::move(values));
}

Field operator-(const Field& f, const Field& g) {
  ensure_same_grid(f, g, "operator-");
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f[i] - g[i];
  return Field(f.grid_ptr(), std::move(values));
}

Field operator*(double s, const Field& f) {
  std::vector<double> values(f.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = s * f[i];
  return Field(f.grid_ptr(), std::move(values));
}

Field operator-(const Field& f) { return -1.0 * f; }

double norm_l2(const Field& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double norm_linf(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double mean(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum / static_cast<double>(f.values().size());
}

double rel_l2_error(const Field& f, const Field& g, double floor) {
  return norm_l2(f - g) / std::max(norm_l2(g), floor);
}

Field random_band_limited(GridPtr grid, int kmax, double decay, unsigned seed,
                          double amplitude) {
  if (kmax < 1 || kmax > grid->n() / 2 - 1)
    throw std::invalid_argument("random_band_limited: kmax out of range");
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  std::vector<std::complex<double>> coeff(grid->size());
  const int dim = grid->dim();
  auto put_mode = [&](int k0, int k1, std::complex<double> c) {
    // write c at +k and conj at -k so the field is real
    const int n = grid->n();
    auto bin = [n](int k) { return (k % n + n) % n; };
    const std::size_t ip = grid->index(bin(k0), bin(k1));
    const std::size_t im = grid->index(bin(-k0), bin(-k1));
    coeff[ip] += c;
    coeff[im] += std::conj(c);
  };
  if (dim == 1) {
    for (int k = 1; k <= kmax; ++k) {
      const double mag = std::pow(decay, k) * gauss(rng);
      const double ph = phase(rng);
      put_mode(k, 0, 0.5 * mag * std::exp(std::complex<double>(0.0, ph)));
    }
  } else {
    for (int k0 = -kmax; k0 <= kmax; ++k0)
      for (int k1 = (k0 > 0 ? -kmax : 1); k1 <= kmax; ++k1) {
        // enumerate one representative per +-k pair
        const double kk = std::hypot(static_cast<double>(k0), static_cast<double>(k1));
        if (kk > kmax) continue;
        const double mag = std::pow(decay, kk) * gauss(rng);
        const double ph = phase(rng);
        put_mode(k0, k1, 0.5 * mag * std::exp(std::complex<double>(0.0, ph)));
      }
  }
  Field f = Field::from_spectrum(std::move(grid), std::move(coeff));
  const double sup = norm_linf(f);
  if (sup == 0.0 || amplitude == 0.0) return Field(f.grid_ptr(), 0.0);
  return (amplitude / sup) * f;
}

Field cosine_mode(GridPtr grid, const std::array<int, 2>& k, double amplitude,
                  double phase) {
  return Field::sample(grid, [&](const std::array<double, 2>& x) {
    return amplitude * std::cos(k[0] * x[0] + k[1] * x[1] + phase);
  });
}

double mode_magnitude(const Field& f, const std::array<int, 2>& k) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  auto bin = [n](int kk) { return (kk % n + n) % n; };
  const auto& coeff = *f.spectrum();
  return std::abs(coeff[g.index(bin(k[0]), bin(k[1]))]);
}

}  // namespace heleshaw
