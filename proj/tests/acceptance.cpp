// Acceptance checks. Usage: acceptance [criterion...]; prints one PASS/FAIL
// line per criterion and exits nonzero if any failed.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "fdd/app.hpp"
#include "fdd/budget.hpp"
#include "fdd/fft.hpp"
#include "fdd/fisher.hpp"
#include "fdd/line_validation.hpp"
#include "fdd/reconstruct.hpp"
#include "fdd/sample.hpp"
#include "fdd/simulate.hpp"
#include "oracles.hpp"

using namespace fdd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const OpticsSpec kOptics(540.0, 1.4);

struct Rig {
  GridSpec grid;
  PupilMask pupil;
  Otf full;
  std::array<Otf, 5> regions;
  double kc;

  explicit Rig(int n, double ka = 0.7)
      : grid(default_grid(kOptics, n)),
        pupil(make_circular_pupil(kOptics, grid)),
        full(compute_otf(pupil)),
        regions(region_otfs(partition_fdd(pupil, ka, GridSpec(1024, 1024, grid.dx()), 0.0))),
        kc(kOptics.cutoff()) {}
};

Outcome otf_oracle() {
  const Timer t;
  const GridSpec g = default_grid(kOptics, 512);
  const Otf full = compute_otf(make_circular_pupil(kOptics, g));
  const double secs = t.seconds();
  double worst = 0.0;
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      worst = std::max(worst, std::abs(full(ix, iy) - oracle::chat(g.k_at(ix, iy).norm() / kOptics.cutoff())));
    }
  }
  return {worst < 2e-3 && secs < 1.0, fmt("max |beta - chat| = %.3e (< 2e-3), %.2f s (< 1 s)", worst, secs)};
}

Outcome crb_enhancement() {
  const Timer t;
  const Rig rig(512);
  const std::vector<WaveVector> k = {{0.9 * rig.kc, 0.0}};
  const FisherTable tab = fisher_table(rig.full, rig.regions, 1.0 / rig.grid.area(), 0.6, k);
  const double ratio = tab.hybrid.entries[0].value / tab.di.entries[0].value;
  const double secs = t.seconds();
  return {ratio >= 4.0 && ratio <= 6.0 && secs < 1.0,
          fmt("CRB_DI / CRB_hybrid at 0.9 k_c = %.3f (in [4, 6]), %.2f s (< 1 s)", ratio, secs)};
}

Outcome budget_ratio() {
  const Timer t;
  const BudgetModel model(kOptics, BudgetParams::defaults());
  const double k = 2 * std::numbers::pi / kOptics.rayleigh_radius();
  const FddBudget f = model.n_min_fdd(k);
  const double ratio = model.n_min_di(k) / f.photons;
  const double secs = t.seconds();
  return {ratio >= 2.2 && ratio <= 2.8 && secs < 30.0,
          fmt("n_DI / n_FDD at 0.61 lambda/NA = %.3f (in [2.2, 2.8]; alpha* %.2f, ka* %.2f), %.1f s (< 30 s)", ratio,
              f.alpha, f.inner_radius_ratio, secs)};
}

Outcome resolution_gain() {
  const Timer t;
  const BudgetModel model(kOptics, BudgetParams::defaults());
  double peak = 0.0, at = 0.0;
  for (const auto& p : resolution_sweep(model, 400)) {
    const double r = p.resolution_di / p.resolution_fdd;
    if (r > peak) {
      peak = r;
      at = p.photons;
    }
  }
  const double secs = t.seconds();
  return {peak >= 1.05 && peak <= 1.15 && secs < 60.0,
          fmt("peak resolution ratio DI/FDD = %.4f at %.3g photons/Airy disk (in [1.05, 1.15]), %.1f s (< 60 s)",
              peak, at, secs)};
}

Outcome noise_spectrum() {
  const Timer t;
  const Rig rig(256);
  const OtfSet set = hybrid_otfs(rig.regions, rig.full, 0.6);
  AcquisitionConfig cfg;
  cfg.photons = 1e6;
  cfg.seed = 2024;
  const RawImageSet raw = acquire(make_test_chart(ChartSpec{}, rig.grid), set, cfg);
  const GridSpec& g = rig.grid;
  const double inner = 1.05 * rig.kc;
  const double outer = std::min(1.5 * rig.kc, g.nyquist());
  bool ok = true;
  std::ostringstream d;
  std::size_t bins = 0;
  for (int l = 0; l < 6; ++l) {
    const SpectralField s = fft_forward(raw.frames[l]);
    double sum = 0.0;
    bins = 0;
    for (int iy = 0; iy < g.ny(); ++iy) {
      for (int ix = 0; ix < g.nx(); ++ix) {
        const double r = g.k_at(ix, iy).norm();
        if (r > inner && r < outer) {
          sum += std::norm(s(ix, iy));
          ++bins;
        }
      }
    }
    const double ratio = sum / bins / raw.totals[l];
    ok = ok && ratio >= 0.95 && ratio <= 1.05;
    d << fmt(" l%d=%.4f", l, ratio);
  }
  const double secs = t.seconds();
  ok = ok && bins >= 1000 && secs < 10.0;
  return {ok, fmt("out-of-band <|g|^2>/N_l over %zu bins:", bins) + d.str() +
                  fmt(" (in [0.95, 1.05]), %.2f s (< 10 s)", secs)};
}

// Three modes in the enhancement band with equal amplitudes, nonnegative
// overall.
struct EnsembleResult {
  std::vector<double> k_over_kc;
  std::vector<double> var_ratio;
  std::vector<double> bias_in_se;
  int trials = 0;
  double seconds = 0.0;
};

const EnsembleResult& ensemble() {
  static const EnsembleResult res = [] {
    const Timer t;
    const Rig rig(256);
    const OtfSet set = hybrid_otfs(rig.regions, rig.full, 0.6);
    const GridSpec& g = rig.grid;
    const double a0 = 1.0 / g.area();
    const double amp = a0 / (3.0 * std::sqrt(2.0));
    std::vector<FourierMode> modes;
    for (double r : {0.86, 0.88, 0.90}) {
      const int m = static_cast<int>(std::lround(r * rig.kc / g.dkx()));
      modes.push_back({{m * g.dkx(), 0.0}, amp, amp});
    }
    const SampleSpectrum sample(a0, modes);
    std::vector<WaveVector> ks;
    for (const auto& m : modes) ks.push_back(m.k);

    const int trials = 500;
    const double photons = 1e6;
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    for (int trial = 0; trial < trials; ++trial) {
      AcquisitionConfig cfg;
      cfg.photons = photons;
      cfg.seed = 77;
      cfg.trial = trial;
      const RawImageSet raw = acquire(sample, set, cfg);
      const ReconstructionResult rec = reconstruct_fdd(raw, set, ReconstructionConfig{});
      const auto est = estimate_fourier_params(rec, a0, ks, photons);
      for (int j = 0; j < 3; ++j) {
        sum[j] += est[j].a;
        sq[j] += est[j].a * est[j].a;
      }
    }
    EnsembleResult out;
    out.trials = trials;
    for (int j = 0; j < 3; ++j) {
      const double mean = sum[j] / trials;
      const double var = (sq[j] - sum[j] * sum[j] / trials) / (trials - 1);
      out.k_over_kc.push_back(ks[j].x / rig.kc);
      out.var_ratio.push_back(photons * var / crb_hybrid(set, a0, ks[j]));
      out.bias_in_se.push_back((mean - amp) / std::sqrt(var / trials));
    }
    out.seconds = t.seconds();
    return out;
  }();
  return res;
}

Outcome crb_saturation() {
  const EnsembleResult& e = ensemble();
  bool ok = e.seconds < 300.0;
  std::ostringstream d;
  for (std::size_t j = 0; j < e.var_ratio.size(); ++j) {
    ok = ok && e.var_ratio[j] >= 0.8 && e.var_ratio[j] <= 1.2;
    d << fmt(" k=%.3fk_c: %.3f", e.k_over_kc[j], e.var_ratio[j]);
  }
  return {ok, fmt("N Var(a)/CRB_hybrid over %d trials:", e.trials) + d.str() +
                  fmt(" (in [0.8, 1.2]), %.1f s (< 300 s)", e.seconds)};
}

Outcome unbiasedness() {
  const EnsembleResult& e = ensemble();
  bool ok = true;
  std::ostringstream d;
  for (std::size_t j = 0; j < e.bias_in_se.size(); ++j) {
    ok = ok && std::abs(e.bias_in_se[j]) <= 3.0;
    d << fmt(" k=%.3fk_c: %+.2f", e.k_over_kc[j], e.bias_in_se[j]);
  }
  return {ok, fmt("(mean a - a) / standard error over %d trials:", e.trials) + d.str() + " (|.| <= 3)"};
}

// Total photons putting `per_airy_disk` photons per Airy disk on the bright
// chart lines.
double chart_budget(const RealField& chart, double per_airy_disk) {
  return per_airy_disk / (chart.max() * kOptics.airy_disk_area());
}

Outcome snr_gain() {
  const Timer t;
  const Rig rig(256);
  const OtfSet set = hybrid_otfs(rig.regions, rig.full, 0.6);
  const WaveVector k87{std::lround(0.87 * rig.kc / rig.grid.dkx()) * rig.grid.dkx(), 0.0};
  const double theory = theoretical_snr_gain_db(set, {0.87 * rig.kc, 0.0});

  const RealField chart = make_test_chart(ChartSpec{}, rig.grid);
  const double photons = chart_budget(chart, 1.5e5);
  const MeanImage di_mean = mean_image(chart, rig.full, photons);
  const int trials = 20;
  double gain[2] = {0.0, 0.0};
  const NoiseMethod methods[2] = {NoiseMethod::theory, NoiseMethod::out_of_band};
  for (int trial = 0; trial < trials; ++trial) {
    AcquisitionConfig cfg;
    cfg.photons = photons;
    cfg.seed = 31;
    cfg.trial = trial;
    const RawImageSet raw = acquire(chart, set, cfg);
    const PoissonFrame di = poissonize(di_mean.field, derive_seed(31, 6, trial));
    const std::array<RealField, 1> frames = {di.counts};
    const std::array<double, 1> totals = {di.total};
    for (int m = 0; m < 2; ++m) {
      gain[m] += (snr_at_k(raw, k87, rig.kc, methods[m]).combined_db -
                  snr_at_k(frames, totals, k87, rig.kc, methods[m]).combined_db) /
                 trials;
    }
  }
  const bool ok = std::abs(theory - 6.63) <= 1.0 && std::abs(gain[0] - gain[1]) <= 0.5;
  return {ok, fmt("theoretical gain at 0.87 k_c = %.2f dB (6.63 +- 1.0); measured gain theory-noise %.2f dB vs "
                  "out-of-band %.2f dB, |diff| = %.3f dB (<= 0.5) over %d trials, %.1f s",
                  theory, gain[0], gain[1], std::abs(gain[0] - gain[1]), trials, t.seconds())};
}

Outcome line_validation() {
  const Timer t;
  const LineValidationReport rep = run_line_validation(LineValidationConfig{});
  const double secs = t.seconds();
  const double worst_offdiag =
      std::max({rep.qfi.offdiag_ratio, rep.fi_di.offdiag_ratio, rep.fi_hybrid.offdiag_ratio});
  const bool a = worst_offdiag < 0.05;
  const bool b = rep.crb_ok();
  const bool c = rep.psd_ok();
  return {a && b && c && secs < 120.0,
          fmt("(a) off-diagonal/diagonal Frobenius: QFI %.3f, FI_DI %.3f, FI_hybrid %.3f (< 0.05) %s; "
              "(b) max CRB deviation QFI %.3f, DI %.3f, hybrid %.3f (<= 0.15) %s; "
              "(c) min eig QFI-FI %.2e / %.2e (>= -1e-6) %s; %.1f s (< 120 s)",
              rep.qfi.offdiag_ratio, rep.fi_di.offdiag_ratio, rep.fi_hybrid.offdiag_ratio, a ? "ok" : "FAIL",
              rep.qfi.crb_max_deviation, rep.fi_di.crb_max_deviation, rep.fi_hybrid.crb_max_deviation,
              b ? "ok" : "FAIL", rep.min_eig_qfi_minus_di, rep.min_eig_qfi_minus_hybrid, c ? "ok" : "FAIL", secs)};
}

bool same_digests(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto ma = nlohmann::json::parse(std::ifstream(a / "manifest.json"));
  const auto mb = nlohmann::json::parse(std::ifstream(b / "manifest.json"));
  return ma.at("artifacts") == mb.at("artifacts") && !ma.at("artifacts").empty();
}

Outcome reduction_determinism() {
  const Rig rig(256);
  // alpha = 0: FDD on the six frames against DI deconvolution of frame 0.
  const OtfSet set0 = hybrid_otfs(rig.regions, rig.full, 0.0);
  AcquisitionConfig cfg;
  cfg.alpha = 0.0;
  cfg.seed = 5;
  const RawImageSet raw = acquire(make_test_chart(ChartSpec{}, rig.grid), set0, cfg);
  const ReconstructionResult f = reconstruct_fdd(raw, set0, ReconstructionConfig{});
  const ReconstructionResult d = reconstruct_di_dcv(raw.frames[0], rig.full, ReconstructionConfig{});
  bool identical = true;
  for (std::size_t i = 0; i < rig.grid.size(); ++i) identical = identical && f.image[i] == d.image[i];

  const auto base = std::filesystem::temp_directory_path() / "fdd_acceptance_determinism";
  std::filesystem::remove_all(base);
  ExperimentConfig ec;
  ec.grid_pixels = 128;
  CommandOptions o1{base / "a", 2, 99};
  CommandOptions o2{base / "b", 2, 99};
  bool digests = true;
  for (const char* cmd : {"simulate", "reconstruct"}) {
    run_command(cmd, ec, {o1.out / cmd, o1.trials, o1.seed});
    run_command(cmd, ec, {o2.out / cmd, o2.trials, o2.seed});
    digests = digests && same_digests(o1.out / cmd, o2.out / cmd);
  }
  std::filesystem::remove_all(base);

  const GridSpec g(256, 256, 0.37);
  const RealField field(g, oracle::random_field(g.size(), 8, -1.0, 2.0));
  const SpectralField spec = fft_forward(field);
  double e_real = 0.0, e_spec = 0.0;
  for (double v : field.values()) e_real += v * v * g.cell_area();
  for (const Complex& v : spec.values()) e_spec += std::norm(v) / g.area();
  const double parseval = std::abs(e_real - e_spec) / e_real;
  const RealField back = fft_inverse(spec);
  double round = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    round = std::max(round, std::abs(back[i] - field[i]));
    peak = std::max(peak, std::abs(field[i]));
  }
  round /= peak;
  const bool ok = identical && digests && parseval <= 1e-9 && round <= 1e-10;
  return {ok, fmt("alpha=0 FDD == DI dcv bitwise: %s; repeated runs give identical digests: %s; Parseval rel err "
                  "%.1e (<= 1e-9); round trip rel err %.1e (<= 1e-10)",
                  identical ? "yes" : "no", digests ? "yes" : "no", parseval, round)};
}

Outcome quintuplet() {
  const Timer t;
  const Rig rig(256);
  const OtfSet set = hybrid_otfs(rig.regions, rig.full, 0.6);
  ChartSpec spec;
  spec.lines_per_mm = k_to_lines_per_mm(0.868 * rig.kc);
  const RealField chart = make_test_chart(spec, rig.grid);
  const SpectralField truth = fft_forward(chart);
  int peak_m = 0;
  double best = 0.0;
  const int centre = static_cast<int>(std::lround(0.868 * rig.kc / rig.grid.dkx()));
  for (int m = centre - 4; m <= centre + 4; ++m) {
    if (std::abs(truth.at({m, 0})) > best) {
      best = std::abs(truth.at({m, 0}));
      peak_m = m;
    }
  }
  const double budget = chart_budget(chart, 1.5e5);
  const MeanImage di_b = mean_image(chart, rig.full, budget);
  const MeanImage di_5b = mean_image(chart, rig.full, 5 * budget);
  const int trials = 200;
  std::array<std::complex<double>, 3> sum{};
  std::array<double, 3> sq{};
  for (int trial = 0; trial < trials; ++trial) {
    AcquisitionConfig cfg;
    cfg.photons = budget;
    cfg.seed = 868;
    cfg.trial = trial;
    const RawImageSet raw = acquire(chart, set, cfg);
    const std::array<ReconstructionResult, 3> rec = {
        reconstruct_fdd(raw, set, ReconstructionConfig{}),
        reconstruct_di_dcv(poissonize(di_b.field, derive_seed(868, 6, trial)).counts, rig.full,
                           ReconstructionConfig{}),
        reconstruct_di_dcv(poissonize(di_5b.field, derive_seed(868, 7, trial)).counts, rig.full,
                           ReconstructionConfig{})};
    for (int i = 0; i < 3; ++i) {
      // Normalize by the photon count so the three ensembles share a scale.
      const Complex v = rec[i].spectrum.at({peak_m, 0}) / rec[i].photons;
      sum[i] += v;
      sq[i] += std::norm(v);
    }
  }
  std::array<double, 3> snr{};
  for (int i = 0; i < 3; ++i) {
    const Complex mean = sum[i] / static_cast<double>(trials);
    const double var = (sq[i] - trials * std::norm(mean)) / (trials - 1);
    snr[i] = 10 * std::log10(std::norm(mean) / var);
  }
  const double secs = t.seconds();
  const bool ok = snr[0] > snr[1] && std::abs(snr[0] - snr[2]) <= 2.0 && secs < 120.0;
  return {ok, fmt("peak-bin SNR at %.3f k_c (%.0f lines/mm, B = %.3g photons, %d trials): FDD(B) %.2f dB, "
                  "DI dcv(B) %.2f dB, DI dcv(5B) %.2f dB; FDD(B) > DI dcv(B) and |FDD(B) - DI dcv(5B)| = %.2f "
                  "(<= 2) dB; %.1f s (< 120 s)",
                  peak_m * rig.grid.dkx() / rig.kc, spec.lines_per_mm, budget, trials, snr[0], snr[1], snr[2],
                  std::abs(snr[0] - snr[2]), secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"OTF matches the chat function", otf_oracle}},
      {2, {"CRB enhancement at 0.9 k_c", crb_enhancement}},
      {3, {"budget ratio at the Rayleigh limit", budget_ratio}},
      {4, {"resolution gain over a budget sweep", resolution_gain}},
      {5, {"out-of-band noise spectrum", noise_spectrum}},
      {6, {"estimator saturates the hybrid CRB", crb_saturation}},
      {7, {"estimator is unbiased", unbiasedness}},
      {8, {"SNR gain at 0.87 k_c", snr_gain}},
      {9, {"1D numeric vs analytic Fisher matrices", line_validation}},
      {10, {"reduction, determinism, transform identities", reduction_determinism}},
      {11, {"quintuplet peak SNR", quintuplet}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, c] : criteria) selected.push_back(id);
  }
  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", id);
      ++failed;
      continue;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", it->second.first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
