#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fdd/error.hpp"
#include "fdd/fft.hpp"
#include "fdd/field_io.hpp"
#include "fdd/optics.hpp"
#include "fdd/sample.hpp"
#include "oracles.hpp"

using namespace fdd;

namespace {

GridSpec small_grid() { return GridSpec(32, 16, 5.0); }

SampleSpectrum two_modes(const GridSpec& g) {
  const double a0 = 1.0 / g.area();
  return SampleSpectrum(a0, {{g.k_of({3, 1}), 0.3 * a0, -0.2 * a0},
                             {g.k_of({0, 2}), 0.1 * a0, 0.25 * a0}});
}

}  // namespace

TEST_CASE("grid spec validates size and pitch") {
  CHECK_THROWS_AS(GridSpec(15, 16, 1.0), InvalidArgument);
  CHECK_THROWS_AS(GridSpec(8, 8, 1.0), InvalidArgument);
  CHECK_THROWS_AS(GridSpec(16, 16, 0.0), InvalidArgument);
  const GridSpec g(64, 32, 2.5);
  CHECK(g.dkx() * g.nx() * g.dx() == doctest::Approx(2 * oracle::pi).epsilon(1e-15));
  CHECK(g.dky() * g.ny() * g.dx() == doctest::Approx(2 * oracle::pi).epsilon(1e-15));
  CHECK(g.area() == doctest::Approx(64 * 32 * 2.5 * 2.5));
}

TEST_CASE("lattice lookup round trips and rejects off-lattice k") {
  const GridSpec g = small_grid();
  for (int my = -8; my < 8; ++my) {
    for (int mx = -16; mx < 16; ++mx) {
      const LatticeIndex m = g.lattice_of(g.k_of({mx, my}));
      CHECK(m == LatticeIndex{mx, my});
    }
  }
  CHECK_THROWS_AS(g.lattice_of({0.5 * g.dkx(), 0.0}), InvalidArgument);
}

TEST_CASE("constant field has a DC-only spectrum") {
  const GridSpec g = small_grid();
  const RealField f(g, std::vector<double>(g.size(), 2.0));
  const SpectralField F = fft_forward(f);
  CHECK(F[0].real() == doctest::Approx(2.0 * g.area()));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::abs(F[i]) < 1e-9 * g.area());
}

TEST_CASE("cosine field matches direct summation at its two bins") {
  const GridSpec g = small_grid();
  const double a0 = 1.0 / g.area();
  std::vector<double> v(g.size());
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      v[g.index(ix, iy)] = a0 * (1 + std::cos(2 * oracle::pi * (3.0 * ix / g.nx() + 2.0 * iy / g.ny())));
    }
  }
  const SpectralField F = fft_forward(RealField(g, v));
  for (LatticeIndex m : {LatticeIndex{3, 2}, LatticeIndex{-3, -2}}) {
    const auto ref = oracle::direct_bin(v, g.nx(), g.ny(), g.dx(), m.mx, m.my);
    CHECK(std::abs(F.at(m) - ref) < 1e-12);
    CHECK(ref.real() == doctest::Approx(a0 * g.area() / 2));
  }
}

TEST_CASE("forward transform agrees with direct summation on random fields") {
  const GridSpec g(16, 16, 3.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto v = oracle::random_field(g.size(), seed, -1.0, 1.0);
    const SpectralField F = fft_forward(RealField(g, v));
    for (int mx : {-8, -3, 0, 5}) {
      for (int my : {-7, 0, 2}) {
        CHECK(std::abs(F.at({mx, my}) - oracle::direct_bin(v, 16, 16, 3.0, mx, my)) < 1e-10);
      }
    }
  }
}

TEST_CASE("round trip and Parseval hold on random fields") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int nx = 16 << (seed % 3);
    const int ny = 16 << ((seed / 3) % 2);
    const GridSpec g(nx, ny, 0.5 + seed);
    const auto v = oracle::random_field(g.size(), seed, -5.0, 5.0);
    const RealField f(g, v);
    const SpectralField F = fft_forward(f);
    double imag = 1.0;
    const RealField back = fft_inverse(F, &imag);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(back[i] - v[i]));
    CHECK(err < 1e-10);
    CHECK(imag < 1e-12);
    CHECK(F.hermitian_defect() < 1e-10);

    double real_energy = 0.0;
    for (double x : v) real_energy += x * x * g.cell_area();
    double spec_energy = 0.0;
    for (const auto& z : F.values()) spec_energy += std::norm(z);
    spec_energy *= g.dkx() * g.dky() / (4 * oracle::pi * oracle::pi);
    CHECK(std::abs(spec_energy / real_energy - 1.0) < 1e-9);
  }
}

TEST_CASE("non-finite input is rejected") {
  const GridSpec g = small_grid();
  std::vector<double> v(g.size(), 1.0);
  v[7] = std::nan("");
  CHECK_THROWS_AS(RealField(g, v), InvalidArgument);
  std::vector<Complex> s(g.size());
  s[3] = Complex(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS(fft_inverse(SpectralField(g, s)), InvalidArgument);
}

TEST_CASE("sample spectrum rejects redundant or duplicate modes") {
  CHECK_THROWS_AS(SampleSpectrum(1.0, {{{-1.0, 0.0}, 0.1, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(SampleSpectrum(1.0, {{{0.0, -1.0}, 0.1, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(SampleSpectrum(1.0, {{{1.0, 2.0}, 0.1, 0.0}, {{1.0, 2.0}, 0.2, 0.0}}),
                  InvalidArgument);
  CHECK_THROWS_AS(SampleSpectrum(0.0, {}), InvalidArgument);
  CHECK_NOTHROW(SampleSpectrum(1.0, {{{0.0, 1.0}, 0.1, 0.0}, {{1.0, -1.0}, 0.1, 0.0}}));
}

TEST_CASE("synthesis of simple spectra") {
  const GridSpec g = small_grid();
  const double a0 = 1.0 / g.area();
  const auto uniform = synthesize_sample(SampleSpectrum(a0, {}), g);
  CHECK(uniform.field.min() == doctest::Approx(a0));
  CHECK(uniform.field.max() == doctest::Approx(a0));

  const auto one = synthesize_sample(SampleSpectrum(a0, {{g.k_of({4, 0}), a0 / 2, 0.0}}), g);
  CHECK(one.field.min() == doctest::Approx(a0 / 2));
  CHECK(one.field.max() == doctest::Approx(3 * a0 / 2));
  CHECK(one.field.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.negative_pixels == 0);

  const auto neg = synthesize_sample(SampleSpectrum(a0, {{g.k_of({4, 0}), 2 * a0, 0.0}}), g);
  CHECK(neg.negative_pixels > 0);
}

TEST_CASE("synthesis evaluates the series pointwise") {
  const GridSpec g = small_grid();
  const SampleSpectrum s = two_modes(g);
  const RealField f = synthesize_sample(s, g).field;
  for (int iy = 0; iy < g.ny(); iy += 3) {
    for (int ix = 0; ix < g.nx(); ix += 5) {
      double ref = s.a0();
      for (const auto& m : s.modes()) {
        const double ph = m.k.x * ix * g.dx() + m.k.y * iy * g.dx();
        ref += m.a * std::cos(ph) + m.b * std::sin(ph);
      }
      CHECK(f(ix, iy) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("synthesis preconditions") {
  const GridSpec g = small_grid();
  const double a0 = 1.0 / g.area();
  CHECK_THROWS_AS(synthesize_sample(SampleSpectrum(2 * a0, {}), g), InvalidArgument);
  CHECK_THROWS_AS(synthesize_sample(SampleSpectrum(a0, {{{0.5 * g.dkx(), 0.0}, a0 / 4, 0.0}}), g),
                  InvalidArgument);
  CHECK_THROWS_AS(synthesize_sample(SampleSpectrum(a0, {{g.k_of({16, 0}), a0 / 4, 0.0}}), g),
                  InvalidArgument);
}

TEST_CASE("analysis recovers synthesized coefficients") {
  const GridSpec g = small_grid();
  const SampleSpectrum s = two_modes(g);
  const SampleSpectrum back = analyze_sample(synthesize_sample(s, g).field);
  CHECK(back.a0() == doctest::Approx(s.a0()).epsilon(1e-12));
  for (const auto& m : back.modes()) {
    const FourierMode* truth = s.find(m.k);
    const double ta = truth ? truth->a : 0.0;
    const double tb = truth ? truth->b : 0.0;
    CHECK(std::abs(m.a - ta) < 1e-9 * s.a0());
    CHECK(std::abs(m.b - tb) < 1e-9 * s.a0());
  }
}

TEST_CASE("analysis of a uniform field") {
  const GridSpec g = small_grid();
  const RealField f(g, std::vector<double>(g.size(), 1.0 / g.area()));
  const SampleSpectrum s = analyze_sample(f);
  CHECK(s.a0() == doctest::Approx(1.0 / g.area()));
  for (const auto& m : s.modes()) {
    CHECK(std::abs(m.a) < 1e-12 * s.a0());
    CHECK(std::abs(m.b) < 1e-12 * s.a0());
  }
}

TEST_CASE("analysis preconditions") {
  const GridSpec g = small_grid();
  CHECK_THROWS_AS(analyze_sample(RealField(g, std::vector<double>(g.size(), 1.0))),
                  InvalidArgument);
  std::vector<Complex> F(g.size());
  F[0] = 1.0;
  F[g.spectral_index({2, 1})] = Complex(0.1, 0.1);
  CHECK_THROWS_AS(analyze_spectrum(SpectralField(g, F)), InvalidArgument);
}

TEST_CASE("property: random band-limited specs round trip") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> bx(0, 20), by(-15, 15);
  std::normal_distribution<double> amp(0.0, 0.05);
  const GridSpec g(48, 32, 7.0);
  const double a0 = 1.0 / g.area();
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<FourierMode> modes;
    for (int j = 0; j < 12; ++j) {
      const LatticeIndex m{bx(rng), by(rng)};
      if (!(m.mx > 0 || (m.mx == 0 && m.my > 0))) continue;
      const WaveVector k = g.k_of(m);
      if (std::any_of(modes.begin(), modes.end(), [&](const FourierMode& q) { return q.k == k; })) continue;
      modes.push_back({k, amp(rng) * a0, amp(rng) * a0});
    }
    const SampleSpectrum s(a0, modes);
    const SampleSpectrum back = analyze_sample(synthesize_sample(s, g).field);
    for (const auto& m : back.modes()) {
      const FourierMode* t = s.find(m.k);
      CHECK(std::abs(m.a - (t ? t->a : 0.0)) < 1e-9 * a0);
      CHECK(std::abs(m.b - (t ? t->b : 0.0)) < 1e-9 * a0);
    }
  }
}

TEST_CASE("test chart peak sits at the line frequency") {
  const OpticsSpec optics(540.0, 1.4);
  const GridSpec g = default_grid(optics, 256);
  const RealField chart = make_test_chart({}, g);
  CHECK(chart.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chart.min() > 0.0);
  const SpectralField F = fft_forward(chart);
  double best = 0.0;
  double best_k = 0.0;
  // Skip the central lobe of the finite bar-group envelope.
  const double k0 = 2 * oracle::pi * 4.5e-3;
  for (int ix = 1; ix < g.nx() / 2; ++ix) {
    if (g.k_at(ix, 0).x < 0.5 * k0) continue;
    const double v = std::abs(F(ix, 0));
    if (v > best) {
      best = v;
      best_k = g.k_at(ix, 0).x;
    }
  }
  CHECK(std::abs(best_k - k0) <= g.dkx());
}

TEST_CASE("test chart orientation and limits") {
  const GridSpec g(128, 128, 20.0);
  ChartSpec c;
  c.lines_per_mm = 5000;
  c.orientation = Orientation::horizontal;
  const RealField h = make_test_chart(c, g);
  c.orientation = Orientation::vertical;
  const RealField v = make_test_chart(c, g);
  for (int iy = 0; iy < g.ny(); iy += 7) {
    for (int ix = 0; ix < g.nx(); ix += 5) CHECK(h(ix, iy) == doctest::Approx(v(iy, ix)));
  }
  c.n_lines = 0;
  const RealField flat = make_test_chart(c, g);
  CHECK(flat.min() == doctest::Approx(flat.max()));
  c.n_lines = 5;
  c.lines_per_mm = 30000;
  CHECK_THROWS_AS(make_test_chart(c, g), InvalidArgument);
}

TEST_CASE("line frequency conversions") {
  const OpticsSpec optics(540.0, 1.4);
  CHECK(lines_per_mm_to_k(4255) / optics.cutoff() == doctest::Approx(0.821).epsilon(1e-3));
  CHECK(k_to_lines_per_mm(lines_per_mm_to_k(1234.5)) == doctest::Approx(1234.5));
  CHECK(k_to_lines_per_mm(optics.cutoff()) == doctest::Approx(5185.2).epsilon(1e-3));
}

TEST_CASE("field files round trip and digests are stable") {
  const auto dir = std::filesystem::temp_directory_path() / "fdd_field_io_test";
  std::filesystem::create_directories(dir);
  const GridSpec g(16, 32, 1.5);
  const RealField f(g, oracle::random_field(g.size(), 3));
  write_field(dir / "f", f, "intensity");
  const RealField back = read_field(dir / "f");
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-6));
  CHECK(file_digest(dir / "f.f32") == file_digest(dir / "f.f32"));
  CHECK(file_digest(dir / "f.f32").size() == 16);

  write_spectrum(dir / "s", fft_forward(f), "spectrum");
  CHECK(std::filesystem::file_size(dir / "s.f32") == g.size() * 8);

  write_pgm(dir / "p.pgm", f);
  std::ifstream in(dir / "p.pgm", std::ios::binary);
  std::string magic;
  in >> magic;
  CHECK(magic == "P5");
  CHECK(std::filesystem::file_size(dir / "p.pgm") > g.size() * 2);
  std::filesystem::remove_all(dir);
}
