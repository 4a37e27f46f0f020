#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "heleshaw/grid.hpp"

using namespace heleshaw;

namespace {
const double kPi = kTwoPi / 2.0;

Field rand_field(const GridPtr& g, unsigned seed, int kmax = 6, double amp = 1.0) {
  return random_band_limited(g, kmax, 0.7, seed, amp);
}
}  // namespace

TEST_CASE("build_grid validates and lays out nodes") {
  auto g = build_grid(1, 8);
  CHECK(g->size() == 8);
  CHECK(g->point(0)[0] == doctest::Approx(0.0));
  CHECK(g->point(1)[0] == doctest::Approx(kPi / 4.0));
  CHECK(g->point(7)[0] == doctest::Approx(7.0 * kPi / 4.0));

  auto g2 = build_grid(2, 16);
  CHECK(g2->size() == 256);
  // wavenumber lattice per axis is {-8,...,7}
  int kmin = 100, kmax = -100;
  for (int b = 0; b < 16; ++b) {
    kmin = std::min(kmin, g2->wavenumber(b));
    kmax = std::max(kmax, g2->wavenumber(b));
  }
  CHECK(kmin == -8);
  CHECK(kmax == 7);

  CHECK_THROWS_AS(build_grid(1, 7), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1, 6), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1, 4098), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(3, 16), std::invalid_argument);
}

TEST_CASE("integrate is exact on constants and orthogonal on modes") {
  for (int n : {8, 12, 256}) {
    auto g = build_grid(1, n);
    CHECK(integrate(Field(g, 1.0)) == kTwoPi);  // bit-exact
    for (int k = 1; k <= 3; ++k)
      CHECK(std::abs(integrate(cosine_mode(g, {k, 0}, 1.0))) <= 1e-12);
  }
  auto g = build_grid(1, 64);
  Field c2 = pointwise(cosine_mode(g, {1, 0}, 1.0), [](double v) { return v * v; });
  CHECK(integrate(c2) == doctest::Approx(kPi).epsilon(1e-13));

  auto g2 = build_grid(2, 16);
  CHECK(integrate(Field(g2, 1.0)) == doctest::Approx(kTwoPi * kTwoPi).epsilon(1e-15));
}

TEST_CASE("apply_multiplier matches Fourier eigenfunctions") {
  auto g = build_grid(1, 64);
  Field f = cosine_mode(g, {3, 0}, 1.0);
  Field out = apply_multiplier(f, symbols::abs_k());
  CHECK(norm_linf(out - 3.0 * f) <= 1e-12);

  CHECK(norm_linf(apply_multiplier(Field(g, 1.0), symbols::abs_k())) <= 1e-14);

  Field s = Field::sample(g, [](const std::array<double, 2>& x) { return std::sin(2 * x[0]); });
  Field lap = apply_multiplier(s, symbols::neg_laplacian());
  CHECK(norm_linf(lap - 4.0 * s) <= 1e-12);
}

TEST_CASE("apply_multiplier rejects non-finite input") {
  auto g = build_grid(1, 8);
  Field f(g, 0.0);
  f.mutable_values()[3] = std::nan("");
  CHECK_THROWS_AS(apply_multiplier(f, symbols::abs_k()), std::invalid_argument);
}

TEST_CASE("apply_multiplier is linear") {
  auto g = build_grid(1, 48);
  Field f = rand_field(g, 11), h = rand_field(g, 12);
  const double a = 1.37, b = -0.61;
  Field lhs = apply_multiplier(a * f + b * h, symbols::abs_k());
  Field rhs = a * apply_multiplier(f, symbols::abs_k()) +
              b * apply_multiplier(h, symbols::abs_k());
  CHECK(norm_linf(lhs - rhs) <= 1e-12 * std::max(1.0, norm_linf(rhs)));
}

TEST_CASE("gradient differentiates exactly") {
  auto g = build_grid(1, 32);
  Field c = cosine_mode(g, {1, 0}, 1.0);
  Field s = Field::sample(g, [](const std::array<double, 2>& x) { return std::sin(x[0]); });
  CHECK(norm_linf(gradient(c)[0] + s) <= 1e-13);
  CHECK(norm_linf(gradient(Field(g, 4.2))[0]) <= 1e-14);

  auto g2 = build_grid(2, 32);
  Field f2 = Field::sample(g2, [](const std::array<double, 2>& x) {
    return std::cos(x[0]) * std::cos(2 * x[1]);
  });
  auto grad = gradient(f2);
  Field e0 = Field::sample(g2, [](const std::array<double, 2>& x) {
    return -std::sin(x[0]) * std::cos(2 * x[1]);
  });
  Field e1 = Field::sample(g2, [](const std::array<double, 2>& x) {
    return -2.0 * std::cos(x[0]) * std::sin(2 * x[1]);
  });
  CHECK(norm_linf(grad[0] - e0) <= 1e-12);
  CHECK(norm_linf(grad[1] - e1) <= 1e-12);
}

TEST_CASE("divergence and calculus identities") {
  auto g = build_grid(1, 32);
  Field s = Field::sample(g, [](const std::array<double, 2>& x) { return std::sin(x[0]); });
  Field c = cosine_mode(g, {1, 0}, 1.0);
  CHECK(norm_linf(divergence({s}) - c) <= 1e-13);
  CHECK(norm_linf(divergence({Field(g, 3.0)})) <= 1e-14);

  auto g2 = build_grid(2, 24);
  Field f = rand_field(g2, 5, 4);
  CHECK(std::abs(integrate(divergence(gradient(f)))) <= 1e-12);
  Field viaMult = apply_multiplier(f, symbols::laplacian());
  CHECK(rel_l2_error(divergence(gradient(f)), viaMult, 1.0) <= 1e-10);

  CHECK_THROWS_AS(divergence({f, f, f}), std::invalid_argument);
  CHECK_THROWS_AS(divergence(std::vector<Field>{}), std::invalid_argument);
}

TEST_CASE("round trip and Hermitian symmetry") {
  for (auto [dim, n] : {std::pair{1, 12}, {1, 256}, {2, 12}, {2, 16}}) {
    auto g = build_grid(dim, n);
    Field f = rand_field(g, 77 + n + dim, std::min(4, n / 3));
    Field back = Field::from_spectrum(g, *f.spectrum());
    CHECK(norm_l2(back - f) <= 1e-12 * std::max(1.0, norm_l2(f)));

    const auto& coeff = *f.spectrum();
    const int nn = g->n();
    auto bin = [nn](int k) { return (k % nn + nn) % nn; };
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      auto k = g->wavenumbers(i);
      auto cm = coeff[g->index(bin(-k[0]), bin(-k[1]))];
      CHECK(std::abs(coeff[i] - std::conj(cm)) <= 1e-13);
    }
  }
}

TEST_CASE("Parseval on random band-limited fields") {
  auto g = build_grid(1, 96);
  for (unsigned seed : {1u, 2u, 3u}) {
    Field f = rand_field(g, seed, 20), h = rand_field(g, seed + 50, 20);
    const auto& cf = *f.spectrum();
    const auto& ch = *h.spectrum();
    std::complex<double> dot = 0.0;
    for (std::size_t i = 0; i < cf.size(); ++i) dot += cf[i] * std::conj(ch[i]);
    const double spectral = kTwoPi * dot.real();
    CHECK(std::abs(inner(f, h) - spectral) <=
          1e-10 * std::max(1.0, std::abs(spectral)));
  }
}

TEST_CASE("dealias implements the 2/3 rule") {
  auto g = build_grid(1, 12);  // cutoff floor(12/3) = 4
  Field m5 = cosine_mode(g, {5, 0}, 1.0);
  Field m2 = cosine_mode(g, {2, 0}, 1.0);
  CHECK(norm_linf(dealias(m5)) <= 1e-14);
  CHECK(norm_linf(dealias(m2) - m2) <= 1e-14);
  Field c(g, 2.5);
  CHECK(norm_linf(dealias(c) - c) <= 1e-14);

  // product back into band: cos2x*cos3x = (cos x + cos 5x)/2 -> cos(x)/2 kept
  Field prod = multiply(m2, cosine_mode(g, {3, 0}, 1.0));
  CHECK(norm_linf(prod - cosine_mode(g, {1, 0}, 0.5)) <= 1e-13);
}

TEST_CASE("random_band_limited is deterministic and band-limited") {
  auto g = build_grid(1, 64);
  Field a = random_band_limited(g, 5, 0.6, 42, 0.1);
  Field b = random_band_limited(g, 5, 0.6, 42, 0.1);
  CHECK(norm_linf(a - b) == 0.0);
  CHECK(norm_linf(a) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(mean(a)) <= 1e-15);
  const auto& coeff = *a.spectrum();
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    auto k = g->wavenumbers(i);
    if (std::abs(k[0]) > 5) CHECK(std::abs(coeff[i]) <= 1e-15);
  }
}

TEST_CASE("mode_magnitude reads single modes") {
  auto g = build_grid(1, 32);
  Field f = cosine_mode(g, {3, 0}, 0.4);
  CHECK(mode_magnitude(f, {3, 0}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mode_magnitude(f, {2, 0}) <= 1e-15);
}
