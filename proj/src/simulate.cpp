#include "fdd/simulate.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "fdd/error.hpp"
#include "fdd/fft.hpp"
#include "fdd/field_io.hpp"
#include "json.hpp"

namespace fdd {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

MeanImage filtered(const SpectralField& f, const Otf& otf, double photons) {
  if (!(f.grid() == otf.grid())) throw InvalidArgument("sample and OTF grids differ");
  if (!(photons >= 0.0) || !std::isfinite(photons)) {
    throw InvalidArgument("photon count must be finite and nonnegative");
  }
  std::vector<Complex> g(f.values().begin(), f.values().end());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= photons * otf[i];
  MeanImage out;
  out.field = fft_inverse(SpectralField(f.grid(), std::move(g)), &out.imag_residual);
  const double tol = -1e-12 * std::max(out.field.max(), 0.0);
  for (double v : out.field.values()) {
    if (v < tol) ++out.negative_pixels;
  }
  return out;
}

SpectralField spectrum_of(const SampleSpectrum& s, const GridSpec& grid) {
  std::vector<Complex> F(grid.size());
  F[0] = s.a0() * grid.area();
  for (const auto& m : s.modes()) {
    const LatticeIndex idx = grid.lattice_of(m.k);
    const Complex half = Complex(m.a, -m.b) * (grid.area() / 2.0);
    F[grid.spectral_index(idx)] += half;
    F[grid.spectral_index({-idx.mx, -idx.my})] += std::conj(half);
  }
  return SpectralField(grid, std::move(F));
}

RawImageSet acquire_spectrum(const SpectralField& f, const OtfSet& otfs,
                             const AcquisitionConfig& cfg) {
  cfg.validate();
  if (std::abs(otfs.alpha - cfg.alpha) > 1e-12) {
    throw InvalidArgument("OTF set alpha differs from the acquisition alpha");
  }
  RawImageSet raw;
  raw.config = cfg;
  for (int l = 0; l < 6; ++l) {
    const Otf& otf = otfs.hybrid[l];
    raw.expected[l] = cfg.photons * otf.dc();
    const MeanImage mean = filtered(f, otf, cfg.photons);
    PoissonFrame frame = poissonize(mean.field, derive_seed(cfg.seed, l, cfg.trial), cfg.read_noise);
    raw.frames[l] = std::move(frame.counts);
    raw.totals[l] = frame.total;
    raw.clipped_pixels += frame.clipped_pixels;
  }
  return raw;
}

}  // namespace

void AcquisitionConfig::validate() const {
  if (!(photons > 0.0) || !std::isfinite(photons)) throw InvalidArgument("photon count N must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (!(read_noise >= 0.0)) throw InvalidArgument("read noise must be nonnegative");
}

double RawImageSet::total() const {
  double t = 0.0;
  for (double v : totals) t += v;
  return t;
}

MeanImage mean_image(const SampleSpectrum& sample, const Otf& otf, double photons) {
  return filtered(spectrum_of(sample, otf.grid()), otf, photons);
}

MeanImage mean_image(const RealField& sample, const Otf& otf, double photons) {
  return filtered(fft_forward(sample), otf, photons);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t frame, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ (trial * 0xd1b54a32d192ed03ull));
}

PoissonFrame poissonize(const RealField& mean, std::uint64_t seed, double read_noise) {
  const GridSpec& g = mean.grid();
  const double cell = g.cell_area();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, read_noise > 0.0 ? read_noise : 1.0);
  PoissonFrame out;
  std::vector<double> values(g.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double m = mean[i] * cell;
    if (m < 0.0) {
      ++out.clipped_pixels;
      m = 0.0;
    }
    double c = 0.0;
    if (m > 0.0) c = static_cast<double>(std::poisson_distribution<long long>(m)(rng));
    if (read_noise > 0.0) c += gauss(rng);
    out.total += c;
    values[i] = c / cell;
  }
  out.counts = RealField(g, std::move(values));
  return out;
}

RawImageSet acquire(const RealField& sample, const OtfSet& otfs, const AcquisitionConfig& cfg) {
  return acquire_spectrum(fft_forward(sample), otfs, cfg);
}

RawImageSet acquire(const SampleSpectrum& sample, const OtfSet& otfs,
                    const AcquisitionConfig& cfg) {
  return acquire_spectrum(spectrum_of(sample, otfs.di.grid()), otfs, cfg);
}

double photons_per_airy_disk(double photons_per_pixel, double dx, const OpticsSpec& optics) {
  return photons_per_pixel / (dx * dx) * optics.airy_disk_area();
}

void write_raw_image_set(const std::filesystem::path& dir, const RawImageSet& raw) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["photons"] = raw.config.photons;
  meta["alpha"] = raw.config.alpha;
  meta["seed"] = raw.config.seed;
  meta["trial"] = raw.config.trial;
  meta["read_noise_counts"] = raw.config.read_noise;
  meta["recorded_totals"] = raw.totals;
  meta["expected_totals"] = raw.expected;
  meta["clipped_pixels"] = raw.clipped_pixels;
  for (int l = 0; l < 6; ++l) {
    write_field(dir / ("frame_" + std::to_string(l)), raw.frames[l],
                l == 0 ? "photon_density_di" : "photon_density_region_" + std::to_string(l));
  }
  std::ofstream out(dir / "raw.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "raw.json").string());
  out << meta.dump(2) << "\n";
}

RawImageSet read_raw_image_set(const std::filesystem::path& dir) {
  std::ifstream in(dir / "raw.json");
  if (!in) throw InvalidArgument("missing " + (dir / "raw.json").string());
  const auto meta = nlohmann::json::parse(in);
  RawImageSet raw;
  raw.config.photons = meta.at("photons").get<double>();
  raw.config.alpha = meta.at("alpha").get<double>();
  raw.config.seed = meta.at("seed").get<std::uint64_t>();
  raw.config.trial = meta.at("trial").get<std::uint64_t>();
  raw.config.read_noise = meta.at("read_noise_counts").get<double>();
  raw.totals = meta.at("recorded_totals").get<std::array<double, 6>>();
  raw.expected = meta.at("expected_totals").get<std::array<double, 6>>();
  raw.clipped_pixels = meta.at("clipped_pixels").get<std::size_t>();
  for (int l = 0; l < 6; ++l) raw.frames[l] = read_field(dir / ("frame_" + std::to_string(l)));
  // Totals are re-derived from the stored float32 data so reconstruction
  // sees exactly what is on disk.
  for (int l = 0; l < 6; ++l) raw.totals[l] = raw.frames[l].integral();
  return raw;
}

}  // namespace fdd
