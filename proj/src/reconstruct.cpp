#include "fdd/reconstruct.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fdd/error.hpp"
#include "fdd/fft.hpp"

namespace fdd {
namespace {

struct Frame {
  SpectralField spectrum;
  const Otf* otf;
};

ReconstructionResult fuse(const std::vector<Frame>& frames, double photons, double cutoff,
                          const ReconstructionConfig& cfg) {
  cfg.validate();
  const GridSpec& g = frames.front().otf->grid();
  const std::size_t n = g.size();
  std::vector<double> s(n, 0.0);
  for (const Frame& f : frames) {
    const double dc = f.otf->dc();
    for (std::size_t i = 0; i < n; ++i) s[i] += (*f.otf)[i] * (*f.otf)[i] / dc;
  }

  ReconstructionResult out;
  out.photons = photons;
  std::vector<double> eps(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const Frame& f : frames) sum += std::abs(f.spectrum[i]);
    eps[i] = photons / (sum * sum);
  }

  std::vector<Complex> fused(n);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (double& e : eps) {
      if (!std::isfinite(e) || e < cfg.epsilon_floor) {
        e = cfg.epsilon_floor;
        ++out.floored_bins;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = s[i] + eps[i];
      if (!(denom > 0.0)) throw InvalidArgument("Wiener denominator vanishes; set a positive epsilon floor");
      Complex acc = 0.0;
      for (const Frame& f : frames) acc += ((*f.otf)[i] / f.otf->dc() / denom) * f.spectrum[i];
      fused[i] = acc;
    }
    out.epsilon_history.push_back(eps);
    for (std::size_t i = 0; i < n; ++i) eps[i] = photons / std::norm(fused[i]);
  }

  if (cfg.band_limit) {
    for (int iy = 0; iy < g.ny(); ++iy) {
      for (int ix = 0; ix < g.nx(); ++ix) {
        if (g.k_at(ix, iy).norm() > cutoff) fused[g.index(ix, iy)] = 0.0;
      }
    }
  }
  out.spectrum = SpectralField(g, std::move(fused));
  out.image = fft_inverse(out.spectrum, &out.imag_residual);
  return out;
}

std::array<SpectralField, 6> spectra_of(std::span<const RealField> frames) {
  std::array<SpectralField, 6> out;
  for (std::size_t l = 0; l < frames.size(); ++l) out[l] = fft_forward(frames[l]);
  return out;
}

}  // namespace

void ReconstructionConfig::validate() const {
  if (iterations < 1 || iterations > 20) throw InvalidArgument("iterations must lie in [1, 20]");
  if (!(epsilon_floor >= 0.0)) throw InvalidArgument("epsilon floor must be nonnegative");
}

std::vector<double> total_transfer(const OtfSet& otfs) {
  std::vector<double> s(otfs.di.grid().size(), 0.0);
  for (const Otf& o : otfs.hybrid) {
    if (!(o.dc() > 0.0)) continue;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += o[i] * o[i] / o.dc();
  }
  return s;
}

WienerWeights fdd_weights(const OtfSet& otfs, std::span<const double> epsilon) {
  const std::vector<double> s = total_transfer(otfs);
  if (epsilon.size() != s.size()) throw InvalidArgument("epsilon array has wrong size");
  WienerWeights w;
  w.epsilon.assign(epsilon.begin(), epsilon.end());
  for (int l = 0; l < 6; ++l) {
    const Otf& o = otfs.hybrid[l];
    w.c[l].assign(s.size(), 0.0);
    if (!(o.dc() > 0.0)) continue;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(epsilon[i] >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
      const double denom = s[i] + epsilon[i];
      if (o[i] == 0.0) continue;
      if (!(denom > 0.0)) throw InvalidArgument("Wiener denominator vanishes; use an epsilon floor");
      w.c[l][i] = o[i] / o.dc() / denom;
    }
  }
  return w;
}

ReconstructionResult reconstruct_fdd(const RawImageSet& raw, const OtfSet& otfs,
                                     const ReconstructionConfig& cfg) {
  const auto spectra = spectra_of(raw.frames);
  std::vector<Frame> frames;
  double photons = 0.0;
  for (int l = 0; l < 6; ++l) {
    if (!(raw.frames[l].grid() == otfs.hybrid[l].grid())) {
      throw InvalidArgument("frame and OTF grids differ");
    }
    if (!(otfs.hybrid[l].dc() > 0.0)) continue;
    frames.push_back({spectra[l], &otfs.hybrid[l]});
    photons += raw.frames[l].integral();
  }
  if (frames.empty()) throw InvalidArgument("no frame has a nonzero OTF");
  return fuse(frames, photons, otfs.cutoff(), cfg);
}

ReconstructionResult reconstruct_di_dcv(const RealField& di_frame, const Otf& otf_di,
                                        const ReconstructionConfig& cfg) {
  if (!(di_frame.grid() == otf_di.grid())) throw InvalidArgument("frame and OTF grids differ");
  if (!(otf_di.dc() > 0.0)) throw InvalidArgument("DI OTF is empty");
  const std::vector<Frame> frames = {{fft_forward(di_frame), &otf_di}};
  return fuse(frames, di_frame.integral(), otf_di.cutoff(), cfg);
}

std::vector<ParameterEstimate> estimate_fourier_params(const ReconstructionResult& result,
                                                       double a0, std::span<const WaveVector> ks,
                                                       double photons) {
  const double n = photons > 0.0 ? photons : result.photons;
  if (!(n > 0.0)) throw InvalidArgument("photon count must be positive");
  const GridSpec& g = result.spectrum.grid();
  std::vector<ParameterEstimate> out;
  for (const WaveVector& k : ks) {
    const LatticeIndex m = g.lattice_of(k);
    const Complex plus = result.spectrum.at(m);
    const Complex minus = result.spectrum.at({-m.mx, -m.my});
    const double a = (a0 / n * (plus + minus)).real();
    const double b = (a0 / n * Complex(0.0, 1.0) * (plus - minus)).real();
    out.push_back({k, a, b});
  }
  return out;
}

double crb_hybrid(const OtfSet& otfs, double a0, WaveVector k) {
  double s = 0.0;
  for (const Otf& o : otfs.hybrid) {
    if (o.dc() > 0.0) s += o.value_at(k) * o.value_at(k) / o.dc();
  }
  return s > 0.0 ? 2.0 * a0 * a0 / s : std::numeric_limits<double>::infinity();
}

const char* to_string(NoiseMethod m) {
  return m == NoiseMethod::theory ? "theory" : "out_of_band";
}

SnrReport snr_at_k(std::span<const RealField> frames, std::span<const double> totals, WaveVector k,
                   double cutoff, NoiseMethod method) {
  if (frames.size() != totals.size() || frames.empty() || frames.size() > 6) {
    throw InvalidArgument("need 1-6 frames with matching totals");
  }
  if (!(k.norm() < cutoff)) throw InvalidArgument("SNR frequency must lie below the cutoff");
  SnrReport rep;
  rep.k = k;
  rep.method = method;
  rep.frame_db.fill(-std::numeric_limits<double>::infinity());
  const GridSpec& g = frames[0].grid();
  const LatticeIndex m = g.lattice_of(k);
  const double outer = std::min(1.5 * cutoff, g.nyquist());
  const double inner = 1.05 * cutoff;
  if (method == NoiseMethod::out_of_band && !(outer > inner)) {
    throw InvalidArgument("out-of-band annulus is empty; the grid Nyquist frequency is too low");
  }
  double combined = 0.0;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    if (!(totals[l] > 0.0)) continue;
    const SpectralField spec = fft_forward(frames[l]);
    double noise = totals[l];
    if (method == NoiseMethod::out_of_band) {
      double sum = 0.0;
      std::size_t count = 0;
      for (int iy = 0; iy < g.ny(); ++iy) {
        for (int ix = 0; ix < g.nx(); ++ix) {
          const double r = g.k_at(ix, iy).norm();
          if (r > inner && r < outer) {
            sum += std::norm(spec(ix, iy));
            ++count;
          }
        }
      }
      if (count == 0) throw InvalidArgument("out-of-band annulus contains no bins");
      noise = sum / static_cast<double>(count);
    }
    const double ratio = std::norm(spec.at(m)) / noise;
    rep.frame_db[l] = 10.0 * std::log10(ratio);
    combined += ratio;
  }
  rep.combined_db = 10.0 * std::log10(combined);
  return rep;
}

SnrReport snr_at_k(const RawImageSet& raw, WaveVector k, double cutoff, NoiseMethod method) {
  return snr_at_k(raw.frames, raw.totals, k, cutoff, method);
}

double theoretical_snr_gain_db(const OtfSet& otfs, WaveVector k) {
  double s = 0.0;
  for (const Otf& o : otfs.hybrid) {
    if (o.dc() > 0.0) s += o.value_at(k) * o.value_at(k) / o.dc();
  }
  const double b = otfs.di.value_at(k);
  return 10.0 * std::log10(s * otfs.di.dc() / (b * b));
}

}  // namespace fdd
