#include "fdd/app.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fdd/fft.hpp"
#include "fdd/field_io.hpp"
#include "fdd/fisher.hpp"

namespace fdd {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- config reading ---------------------------------------------------------

class Section {
 public:
  Section(const json& doc, std::string path, std::set<std::string> allowed)
      : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    for (const auto& [key, value] : doc_.items()) {
      if (!allowed.count(key)) throw ConfigError(at(key), "unknown field");
    }
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& raw(const std::string& key) const { return doc_.at(key); }

  void number(const std::string& key, double& out) const {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(at(key), "must be finite");
  }
  void integer(const std::string& key, int& out) const {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = v.get<int>();
  }
  void unsigned64(const std::string& key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(at(key), "expected a nonnegative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void boolean(const std::string& key, bool& out) const {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = v.get<bool>();
  }
  void numbers(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& doc_;
  std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

// ---- experiment assembly ----------------------------------------------------

struct Experiment {
  OpticsSpec optics;
  GridSpec grid;
  PupilMask pupil;
  Otf full;
  PupilPartition partition;
  std::array<Otf, 5> regions;
  OtfSet otfs;
  OtfSet di_only;
  RealField sample;
  std::optional<SampleSpectrum> spectrum;
  double a0 = 0.0;
};

Experiment build(const ExperimentConfig& cfg) {
  Experiment e{OpticsSpec(cfg.wavelength_nm, cfg.numerical_aperture), {}, {}, {}, {}, {}, {}, {}, {}, {}, 0.0};
  const double dx = cfg.pixel_nm > 0.0 ? cfg.pixel_nm : 0.8 * std::numbers::pi / e.optics.cutoff();
  e.grid = GridSpec(cfg.grid_pixels, cfg.grid_pixels, dx);
  e.pupil = make_circular_pupil(e.optics, e.grid);
  e.full = compute_otf(e.pupil);
  e.partition = partition_fdd(e.pupil, cfg.ka_over_kc, GridSpec(cfg.canvas_pixels, cfg.canvas_pixels, dx),
                              cfg.footprint_nm);
  e.regions = region_otfs(e.partition);
  e.otfs = hybrid_otfs(e.regions, e.full, cfg.acquisition.alpha);
  e.di_only = hybrid_otfs(e.regions, e.full, 0.0);
  e.a0 = 1.0 / e.grid.area();
  if (cfg.sample == SampleKind::chart) {
    e.sample = make_test_chart(cfg.chart, e.grid);
  } else {
    const double kc = e.optics.cutoff();
    std::vector<FourierMode> modes;
    for (const ModeConfig& m : cfg.modes) {
      const LatticeIndex idx{static_cast<int>(std::lround(m.kx_over_kc * kc / e.grid.dkx())),
                             static_cast<int>(std::lround(m.ky_over_kc * kc / e.grid.dky()))};
      modes.push_back({{idx.mx * e.grid.dkx(), idx.my * e.grid.dky()}, m.a_over_a0 * e.a0, m.b_over_a0 * e.a0});
    }
    e.spectrum = SampleSpectrum(e.a0, std::move(modes));
    e.sample = synthesize_sample(*e.spectrum, e.grid).field;
  }
  return e;
}

RawImageSet simulate_trial(const Experiment& e, const ExperimentConfig& cfg, int trial) {
  AcquisitionConfig acq = cfg.acquisition;
  acq.trial = static_cast<std::uint64_t>(trial);
  return e.spectrum ? acquire(*e.spectrum, e.otfs, acq) : acquire(e.sample, e.otfs, acq);
}

// Frame index 6 is reserved for the full-budget direct-imaging reference.
constexpr std::uint64_t kReferenceFrame = 6;

PoissonFrame reference_trial(const MeanImage& mean, const ExperimentConfig& cfg, int trial) {
  return poissonize(mean.field, derive_seed(cfg.acquisition.seed, kReferenceFrame, trial),
                    cfg.acquisition.read_noise);
}

MeanImage reference_mean(const Experiment& e, const ExperimentConfig& cfg) {
  return e.spectrum ? mean_image(*e.spectrum, e.full, cfg.acquisition.photons)
                    : mean_image(e.sample, e.full, cfg.acquisition.photons);
}

std::vector<WaveVector> analysis_ks(const Experiment& e, const ExperimentConfig& cfg) {
  std::vector<WaveVector> ks;
  if (e.spectrum) {
    for (const auto& m : e.spectrum->modes()) ks.push_back(m.k);
    return ks;
  }
  const double kc = e.optics.cutoff();
  for (double r : cfg.analysis_k_over_kc) {
    const int m = static_cast<int>(std::lround(r * kc / e.grid.dkx()));
    ks.push_back({m * e.grid.dkx(), 0.0});
  }
  return ks;
}

// ---- output helpers ---------------------------------------------------------

class Outputs {
 public:
  Outputs(fs::path dir, CommandResult& result) : dir_(std::move(dir)), result_(result) {
    fs::create_directories(dir_);
  }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void add(const fs::path& p) { result_.artifacts.push_back(p); }
  void field(const std::string& stem, const RealField& f, const std::string& kind) {
    write_field(path(stem), f, kind);
    add(path(stem + ".f32"));
    add(path(stem + ".json"));
  }
  void preview(const std::string& name, const RealField& f) {
    write_pgm(path(name), f);
    add(path(name));
  }
  std::ofstream csv(const std::string& name) {
    std::ofstream out(path(name));
    if (!out) throw std::runtime_error("cannot write " + path(name).string());
    out.precision(12);
    add(path(name));
    return out;
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  CommandResult& result_;
};

RealField otf_field(const Otf& o) {
  return RealField(o.grid(), std::vector<double>(o.values().begin(), o.values().end()));
}

// ---- commands ---------------------------------------------------------------

void cmd_otf(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  out.field("otf_di", otf_field(e.full), "otf");
  for (int l = 0; l < 5; ++l) {
    out.field("otf_region_" + std::to_string(l + 1), otf_field(e.regions[l]), "otf");
  }
  out.field("psf", compute_psf(e.pupil), "psf");

  const double kc = e.optics.cutoff();
  auto csv = out.csv("otf_axis.csv");
  csv << "k,k_over_kc,chat,beta_DI";
  for (int l = 1; l <= 5; ++l) csv << ",beta_" << l;
  for (int l = 0; l <= 5; ++l) csv << ",beta_H_" << l;
  csv << '\n';
  double worst = 0.0;
  for (int m = 0; m < e.grid.nx() / 2; ++m) {
    const double k = m * e.grid.dkx();
    const double chat = circular_otf(k / kc);
    worst = std::max(worst, std::abs(e.full.at({m, 0}) - chat));
    csv << k << ',' << k / kc << ',' << chat << ',' << e.full.at({m, 0});
    for (const Otf& o : e.regions) csv << ',' << o.at({m, 0});
    for (const Otf& o : e.otfs.hybrid) csv << ',' << o.at({m, 0});
    csv << '\n';
  }

  double dc_sum = 0.0;
  json dcs = json::array();
  for (const Otf& o : e.regions) {
    dc_sum += o.dc();
    dcs.push_back(o.dc());
  }
  bool symmetric = true;
  bool bounded = true;
  for (int iy = 0; iy < e.grid.ny(); ++iy) {
    for (int ix = 0; ix < e.grid.nx(); ++ix) {
      const LatticeIndex m{e.grid.signed_x(ix), e.grid.signed_y(iy)};
      if (e.grid.is_nyquist(m)) continue;
      if (e.full.at(m) != e.full.at({-m.mx, -m.my})) symmetric = false;
      double parts = 0.0;
      for (const Otf& o : e.regions) parts += o.at(m);
      if (parts > e.full.at(m) + 1e-12) bounded = false;
    }
  }
  r.summary["region_dc"] = dcs;
  r.summary["max_abs_error_vs_chat"] = worst;
  r.summary["inner_radius_ratio"] = cfg.ka_over_kc;
  r.invariants["region_dc_sum_is_one"] = std::abs(dc_sum - 1.0) < 1e-12;
  r.invariants["di_dc_is_one"] = std::abs(e.full.dc() - 1.0) < 1e-12;
  r.invariants["otf_centro_symmetric"] = symmetric;
  r.invariants["regions_bounded_by_full_otf"] = bounded;
}

void cmd_fisher(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  const double kc = e.optics.cutoff();
  const auto ks = axis_wavevectors(e.grid, kc);
  const FisherTable t = fisher_table(e.full, e.regions, e.a0, cfg.acquisition.alpha, ks);
  write_fisher_csv(out.path("fisher.csv"), t, cfg.acquisition.photons);
  out.add(out.path("fisher.csv"));

  bool di_bounded = true, hybrid_bounded = true;
  double ratio_09 = 0.0, best_gap = 1.0, peak = 0.0, peak_k = 0.0;
  for (std::size_t i = 0; i < t.qfi.entries.size(); ++i) {
    const double q = t.qfi.entries[i].value;
    if (t.di.entries[i].value > q * (1 + 1e-12)) di_bounded = false;
    if (t.hybrid.entries[i].value > q * (1 + 1e-12)) hybrid_bounded = false;
    const double k = t.qfi.entries[i].k.x;
    if (t.di.entries[i].value > 0.0 && t.hybrid.entries[i].value > 0.0) {
      const double ratio = t.hybrid.entries[i].value / t.di.entries[i].value;
      if (std::abs(k / kc - 0.9) < best_gap) {
        best_gap = std::abs(k / kc - 0.9);
        ratio_09 = ratio;
      }
      if (ratio > peak) {
        peak = ratio;
        peak_k = k / kc;
      }
    }
  }
  r.summary["crb_ratio_di_over_hybrid_at_0.9kc"] = ratio_09;
  r.summary["peak_crb_ratio"] = peak;
  r.summary["peak_crb_ratio_k_over_kc"] = peak_k;
  r.invariants["qfi_bounds_di_fi"] = di_bounded;
  r.invariants["qfi_bounds_hybrid_fi"] = hybrid_bounded;
}

void cmd_budget(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  const BudgetModel model(e.optics, cfg.budget);
  write_budget_csv(out.path("budget.csv"), model);
  out.add(out.path("budget.csv"));

  const auto sweep = resolution_sweep(model);
  auto csv = out.csv("resolution_sweep.csv");
  csv << "photons_per_airy_disk,resolution_DI_nm,resolution_FDD_nm,ratio\n";
  double peak = 0.0, peak_photons = 0.0;
  for (const auto& p : sweep) {
    const double ratio = p.resolution_di / p.resolution_fdd;
    csv << p.photons << ',' << p.resolution_di << ',' << p.resolution_fdd << ',' << ratio << '\n';
    if (ratio > peak) {
      peak = ratio;
      peak_photons = p.photons;
    }
  }

  const double k_rayleigh = 2.0 * std::numbers::pi / e.optics.rayleigh_radius();
  const FddBudget at_rayleigh = model.n_min_fdd(k_rayleigh);
  r.summary["budget_ratio_at_rayleigh"] = model.n_min_di(k_rayleigh) / at_rayleigh.photons;
  r.summary["alpha_star_at_rayleigh"] = at_rayleigh.alpha;
  r.summary["ka_star_at_rayleigh"] = at_rayleigh.inner_radius_ratio;
  r.summary["peak_resolution_ratio"] = peak;
  r.summary["peak_resolution_photons_per_airy_disk"] = peak_photons;

  bool monotone = true, fdd_le_di = true;
  double prev_di = 0.0, prev_fdd = 0.0;
  for (const auto& p : budget_curve(model)) {
    if (p.n_di < prev_di || p.n_fdd < prev_fdd) monotone = false;
    if (p.n_fdd > p.n_di * (1 + 1e-12)) fdd_le_di = false;
    prev_di = p.n_di;
    prev_fdd = p.n_fdd;
  }
  r.invariants["budgets_monotone_in_k"] = monotone;
  r.invariants["fdd_budget_at_most_di"] = fdd_le_di;
}

void cmd_simulate(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  out.field("sample", e.sample, "sample_intensity");
  out.preview("sample.pgm", e.sample);
  const MeanImage ref = reference_mean(e, cfg);
  double total = 0.0;
  std::size_t clipped = 0;
  json totals = json::array();
  for (int t = 0; t < cfg.trials; ++t) {
    const RawImageSet raw = simulate_trial(e, cfg, t);
    const fs::path dir = out.path("raw") / ("trial_" + std::to_string(t));
    write_raw_image_set(dir, raw);
    for (const auto& entry : fs::directory_iterator(dir)) out.add(entry.path());
    const PoissonFrame di = reference_trial(ref, cfg, t);
    out.field("raw/trial_" + std::to_string(t) + "/di_reference", di.counts, "photon_density_di_reference");
    if (t == 0) {
      for (int l = 0; l < 6; ++l) out.preview("frame_" + std::to_string(l) + ".pgm", raw.frames[l]);
      out.preview("di_reference.pgm", di.counts);
    }
    total += raw.total();
    clipped += raw.clipped_pixels;
    totals.push_back(raw.totals);
  }
  const double mean_total = total / cfg.trials;
  const double sigma = std::sqrt(cfg.acquisition.photons / cfg.trials) +
                       cfg.acquisition.read_noise * std::sqrt(6.0 * e.grid.size() / cfg.trials);
  r.summary["recorded_totals"] = totals;
  r.summary["mean_total_photons"] = mean_total;
  r.summary["clipped_pixels"] = clipped;
  r.invariants["photon_conservation_5_sigma"] = std::abs(mean_total - cfg.acquisition.photons) < 5.0 * sigma;
}

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++n;
  }
  double mean() const { return sum / n; }
  double variance() const { return n > 1 ? (sq - sum * sum / n) / (n - 1) : 0.0; }
};

void cmd_reconstruct(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  const auto ks = analysis_ks(e, cfg);
  const MeanImage ref = reference_mean(e, cfg);
  const SpectralField truth_spec = fft_forward(e.sample);
  ReconstructionResult truth_holder;
  truth_holder.spectrum = truth_spec;
  truth_holder.photons = 1.0;
  const auto truth = estimate_fourier_params(truth_holder, e.a0, ks);

  std::vector<std::array<Moments, 4>> stats(ks.size());
  bool finite = true;
  std::size_t floored = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    const RawImageSet raw = simulate_trial(e, cfg, t);
    const ReconstructionResult fdd = reconstruct_fdd(raw, e.otfs, cfg.reconstruction);
    const PoissonFrame di = reference_trial(ref, cfg, t);
    const ReconstructionResult dcv = reconstruct_di_dcv(di.counts, e.full, cfg.reconstruction);
    for (double v : fdd.image.values()) finite = finite && std::isfinite(v);
    for (double v : dcv.image.values()) finite = finite && std::isfinite(v);
    floored += fdd.floored_bins;
    const auto ef = estimate_fourier_params(fdd, e.a0, ks);
    const auto ed = estimate_fourier_params(dcv, e.a0, ks);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      stats[j][0].add(ef[j].a);
      stats[j][1].add(ef[j].b);
      stats[j][2].add(ed[j].a);
      stats[j][3].add(ed[j].b);
    }
    if (t == 0) {
      out.field("fdd", fdd.image, "reconstruction_fdd");
      out.field("di_dcv", dcv.image, "reconstruction_di_dcv");
      out.field("di", di.counts, "photon_density_di_reference");
      out.preview("fdd.pgm", fdd.image);
      out.preview("di_dcv.pgm", dcv.image);
      out.preview("di.pgm", di.counts);
      r.summary["photons_fdd"] = fdd.photons;
      r.summary["photons_di"] = dcv.photons;
    }
  }

  auto csv = out.csv("estimates.csv");
  csv << "kx,ky,k_over_kc,method,param,truth,mean,std_error,ensemble_variance,crb_prediction,"
         "variance_over_crb,trials\n";
  const double kc = e.optics.cutoff();
  const double n = cfg.acquisition.photons;
  json rows = json::array();
  for (std::size_t j = 0; j < ks.size(); ++j) {
    for (int s = 0; s < 4; ++s) {
      const bool is_fdd = s < 2;
      const double crb = (is_fdd ? crb_hybrid(e.otfs, e.a0, ks[j]) : crb_hybrid(e.di_only, e.a0, ks[j])) / n;
      const Moments& m = stats[j][s];
      const double var = m.variance();
      const double tv = s % 2 == 0 ? truth[j].a : truth[j].b;
      csv << ks[j].x << ',' << ks[j].y << ',' << ks[j].norm() / kc << ',' << (is_fdd ? "fdd" : "di_dcv")
          << ',' << (s % 2 == 0 ? 'a' : 'b') << ',' << tv << ',' << m.mean() << ','
          << std::sqrt(var / m.n) << ',' << var << ',' << crb << ',' << var / crb << ',' << m.n << '\n';
      rows.push_back({{"k_over_kc", ks[j].norm() / kc},
                      {"method", is_fdd ? "fdd" : "di_dcv"},
                      {"param", s % 2 == 0 ? "a" : "b"},
                      {"variance_over_crb", var / crb}});
    }
  }
  r.summary["estimates"] = rows;
  r.summary["floored_bins"] = floored;
  r.invariants["finite_reconstructions"] = finite;
}

void cmd_snr(const Experiment& e, const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  const auto ks = analysis_ks(e, cfg);
  const double kc = e.optics.cutoff();
  const MeanImage ref = reference_mean(e, cfg);
  const NoiseMethod methods[2] = {NoiseMethod::theory, NoiseMethod::out_of_band};
  // [k][method][acquisition]: per-frame and combined dB summed over trials.
  struct Acc {
    std::array<double, 6> frame{};
    double combined = 0.0;
  };
  std::vector<std::array<std::array<Acc, 2>, 2>> acc(ks.size());
  for (int t = 0; t < cfg.trials; ++t) {
    const RawImageSet raw = simulate_trial(e, cfg, t);
    const PoissonFrame di = reference_trial(ref, cfg, t);
    const std::array<RealField, 1> di_frames = {di.counts};
    const std::array<double, 1> di_totals = {di.total};
    for (std::size_t j = 0; j < ks.size(); ++j) {
      for (int mi = 0; mi < 2; ++mi) {
        const SnrReport f = snr_at_k(raw, ks[j], kc, methods[mi]);
        const SnrReport d = snr_at_k(di_frames, di_totals, ks[j], kc, methods[mi]);
        for (int l = 0; l < 6; ++l) acc[j][mi][0].frame[l] += f.frame_db[l];
        acc[j][mi][0].combined += f.combined_db;
        acc[j][mi][1].frame[0] += d.frame_db[0];
        acc[j][mi][1].combined += d.combined_db;
      }
    }
  }

  auto csv = out.csv("snr.csv");
  csv << "kx,ky,k_over_kc,method,acquisition,frame_0_db,frame_1_db,frame_2_db,frame_3_db,"
         "frame_4_db,frame_5_db,combined_db,trials\n";
  auto gain_csv = out.csv("snr_gain.csv");
  gain_csv << "kx,ky,k_over_kc,theoretical_gain_db,measured_gain_theory_db,measured_gain_out_of_band_db\n";
  json gains = json::array();
  for (std::size_t j = 0; j < ks.size(); ++j) {
    double measured[2] = {0.0, 0.0};
    for (int mi = 0; mi < 2; ++mi) {
      for (int a = 0; a < 2; ++a) {
        const Acc& x = acc[j][mi][a];
        csv << ks[j].x << ',' << ks[j].y << ',' << ks[j].norm() / kc << ',' << to_string(methods[mi]) << ','
            << (a == 0 ? "fdd" : "di");
        for (int l = 0; l < 6; ++l) {
          if (a == 1 && l > 0) {
            csv << ',';
          } else {
            csv << ',' << x.frame[l] / cfg.trials;
          }
        }
        csv << ',' << x.combined / cfg.trials << ',' << cfg.trials << '\n';
      }
      measured[mi] = (acc[j][mi][0].combined - acc[j][mi][1].combined) / cfg.trials;
    }
    const double theory = theoretical_snr_gain_db(e.otfs, ks[j]);
    gain_csv << ks[j].x << ',' << ks[j].y << ',' << ks[j].norm() / kc << ',' << theory << ','
             << measured[0] << ',' << measured[1] << '\n';
    gains.push_back({{"k_over_kc", ks[j].norm() / kc},
                     {"theoretical_gain_db", theory},
                     {"measured_gain_theory_db", measured[0]},
                     {"measured_gain_out_of_band_db", measured[1]}});
  }
  r.summary["gains"] = gains;
}

void cmd_validate(const ExperimentConfig& cfg, Outputs& out, CommandResult& r) {
  const LineValidationReport rep = run_line_validation(cfg.validation);
  write_line_validation_csv(out.path("validation.csv"), rep);
  out.add(out.path("validation.csv"));
  auto mat = [](const MatrixComparison& m) {
    return json{{"offdiag_ratio", m.offdiag_ratio},
                {"rms_correlation", m.rms_correlation},
                {"cos_sin_deviation", m.cos_sin_deviation},
                {"crb_max_deviation", m.crb_max_deviation}};
  };
  r.summary["support_size"] = rep.support_size;
  r.summary["qfi"] = mat(rep.qfi);
  r.summary["fi_di"] = mat(rep.fi_di);
  r.summary["fi_hybrid"] = mat(rep.fi_hybrid);
  r.summary["min_eig_qfi_minus_di"] = rep.min_eig_qfi_minus_di;
  r.summary["min_eig_qfi_minus_hybrid"] = rep.min_eig_qfi_minus_hybrid;
  r.summary["failing_bins"] = rep.failing_bins;
  r.invariants["offdiag_mass_within_tolerance"] = rep.offdiag_ok();
  r.invariants["crb_diagonal_within_tolerance"] = rep.crb_ok();
  r.invariants["qfi_minus_fi_psd"] = rep.psd_ok();
  if (!rep.failing_bins.empty()) {
    std::ostringstream msg;
    msg << "CRB deviation above tolerance at k bins:";
    for (int b : rep.failing_bins) msg << ' ' << b;
    r.failures.push_back(msg.str());
  }
}

json seeds_json(const ExperimentConfig& cfg, const std::string& command) {
  json s;
  s["base"] = cfg.acquisition.seed;
  s["trials"] = cfg.trials;
  if (command == "validate") {
    s["validation"] = cfg.validation.seed;
    return s;
  }
  if (command == "simulate" || command == "reconstruct" || command == "snr") {
    json per = json::array();
    for (int t = 0; t < cfg.trials; ++t) {
      json frames = json::array();
      for (std::uint64_t l = 0; l <= kReferenceFrame; ++l) {
        frames.push_back(derive_seed(cfg.acquisition.seed, l, static_cast<std::uint64_t>(t)));
      }
      per.push_back(frames);
    }
    s["derived"] = per;
  }
  return s;
}

}  // namespace

// ---- config parse / serialize ------------------------------------------------

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  const Section root(doc, "", {"optics", "grid", "sample", "partition", "acquisition", "reconstruction",
                               "budget", "analysis", "validation"});
  if (root.has("optics")) {
    const Section s(root.raw("optics"), "/optics", {"wavelength_nm", "numerical_aperture"});
    s.number("wavelength_nm", c.wavelength_nm);
    s.number("numerical_aperture", c.numerical_aperture);
    require(c.wavelength_nm > 0, s.at("wavelength_nm"), "must be positive");
    require(c.numerical_aperture > 0 && c.numerical_aperture <= 1.6, s.at("numerical_aperture"),
            "must lie in (0, 1.6]");
  }
  if (root.has("grid")) {
    const Section s(root.raw("grid"), "/grid", {"pixels", "pixel_nm"});
    s.integer("pixels", c.grid_pixels);
    s.number("pixel_nm", c.pixel_nm);
    require(c.grid_pixels >= 16 && c.grid_pixels % 2 == 0, s.at("pixels"), "must be an even integer >= 16");
    require(c.pixel_nm >= 0, s.at("pixel_nm"), "must be nonnegative (0 selects k_c dx = 0.8 pi)");
  }
  if (root.has("sample")) {
    const Section s(root.raw("sample"), "/sample", {"kind", "chart", "modes"});
    const std::string kind = s.text("kind", "chart");
    require(kind == "chart" || kind == "modes", s.at("kind"), "must be \"chart\" or \"modes\"");
    c.sample = kind == "chart" ? SampleKind::chart : SampleKind::modes;
    if (s.has("chart")) {
      const Section ch(s.raw("chart"), "/sample/chart",
                       {"lines_per_mm", "n_lines", "orientation", "background", "line_length_pitches"});
      ch.number("lines_per_mm", c.chart.lines_per_mm);
      ch.integer("n_lines", c.chart.n_lines);
      ch.number("background", c.chart.background);
      ch.number("line_length_pitches", c.chart.line_length_pitches);
      const std::string o = ch.text("orientation", "vertical");
      require(o == "vertical" || o == "horizontal", ch.at("orientation"), "must be \"vertical\" or \"horizontal\"");
      c.chart.orientation = o == "vertical" ? Orientation::vertical : Orientation::horizontal;
      require(c.chart.lines_per_mm > 0, ch.at("lines_per_mm"), "must be positive");
      require(c.chart.n_lines >= 1, ch.at("n_lines"), "must be at least 1");
      require(c.chart.background >= 0, ch.at("background"), "must be nonnegative");
      require(c.chart.line_length_pitches > 0, ch.at("line_length_pitches"), "must be positive");
    }
    if (s.has("modes")) {
      const json& arr = s.raw("modes");
      require(arr.is_array(), s.at("modes"), "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "/sample/modes/" + std::to_string(i);
        const Section m(arr[i], p, {"kx_over_kc", "ky_over_kc", "a_over_a0", "b_over_a0"});
        ModeConfig mc;
        m.number("kx_over_kc", mc.kx_over_kc);
        m.number("ky_over_kc", mc.ky_over_kc);
        m.number("a_over_a0", mc.a_over_a0);
        m.number("b_over_a0", mc.b_over_a0);
        c.modes.push_back(mc);
      }
    }
    require(c.sample == SampleKind::chart || !c.modes.empty(), s.at("modes"),
            "a \"modes\" sample needs at least one mode");
  }
  if (root.has("partition")) {
    const Section s(root.raw("partition"), "/partition", {"ka_over_kc", "footprint_nm", "canvas_pixels"});
    s.number("ka_over_kc", c.ka_over_kc);
    s.number("footprint_nm", c.footprint_nm);
    s.integer("canvas_pixels", c.canvas_pixels);
    require(c.ka_over_kc > 0 && c.ka_over_kc < 1, s.at("ka_over_kc"), "must lie in (0, 1)");
    require(c.footprint_nm >= 0, s.at("footprint_nm"), "must be nonnegative");
    require(c.canvas_pixels > 0, s.at("canvas_pixels"), "must be positive");
  }
  if (root.has("acquisition")) {
    const Section s(root.raw("acquisition"), "/acquisition",
                    {"photons", "alpha", "seed", "trials", "read_noise_counts"});
    s.number("photons", c.acquisition.photons);
    s.number("alpha", c.acquisition.alpha);
    s.unsigned64("seed", c.acquisition.seed);
    s.integer("trials", c.trials);
    s.number("read_noise_counts", c.acquisition.read_noise);
    require(c.acquisition.photons > 0, s.at("photons"), "must be positive");
    require(c.acquisition.alpha >= 0 && c.acquisition.alpha <= 1, s.at("alpha"), "must lie in [0, 1]");
    require(c.trials >= 1, s.at("trials"), "must be at least 1");
    require(c.acquisition.read_noise >= 0, s.at("read_noise_counts"), "must be nonnegative");
  }
  if (root.has("reconstruction")) {
    const Section s(root.raw("reconstruction"), "/reconstruction", {"iterations", "epsilon_floor", "band_limit"});
    s.integer("iterations", c.reconstruction.iterations);
    s.number("epsilon_floor", c.reconstruction.epsilon_floor);
    s.boolean("band_limit", c.reconstruction.band_limit);
    require(c.reconstruction.iterations >= 1 && c.reconstruction.iterations <= 20, s.at("iterations"),
            "must lie in [1, 20]");
    require(c.reconstruction.epsilon_floor >= 0, s.at("epsilon_floor"), "must be nonnegative");
  }
  if (root.has("budget")) {
    const Section s(root.raw("budget"), "/budget", {"roughness", "gamma", "alphas", "ka_over_kc_grid", "grid_pixels"});
    s.number("roughness", c.budget.roughness);
    s.number("gamma", c.budget.gamma);
    s.numbers("alphas", c.budget.alphas);
    s.numbers("ka_over_kc_grid", c.budget.inner_radius_ratios);
    s.integer("grid_pixels", c.budget.grid_n);
    require(c.budget.roughness > 0, s.at("roughness"), "must be positive");
    require(c.budget.gamma > 0, s.at("gamma"), "must be positive");
    for (std::size_t i = 0; i < c.budget.alphas.size(); ++i) {
      require(c.budget.alphas[i] >= 0 && c.budget.alphas[i] <= 1, s.at("alphas") + "/" + std::to_string(i),
              "must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < c.budget.inner_radius_ratios.size(); ++i) {
      const double v = c.budget.inner_radius_ratios[i];
      require(v > 0 && v < 1, s.at("ka_over_kc_grid") + "/" + std::to_string(i), "must lie in (0, 1)");
    }
    require(c.budget.grid_n >= 16 && c.budget.grid_n % 2 == 0, s.at("grid_pixels"), "must be an even integer >= 16");
  }
  if (root.has("analysis")) {
    const Section s(root.raw("analysis"), "/analysis", {"k_over_kc"});
    s.numbers("k_over_kc", c.analysis_k_over_kc);
    for (std::size_t i = 0; i < c.analysis_k_over_kc.size(); ++i) {
      const double v = c.analysis_k_over_kc[i];
      require(v > 0 && v < 1, s.at("k_over_kc") + "/" + std::to_string(i), "must lie in (0, 1)");
    }
  }
  if (root.has("validation")) {
    const Section s(root.raw("validation"), "/validation",
                    {"pixels", "bin_step", "n_modes", "cutoff_bins", "pixel_nm", "seed", "min_over_max", "alpha",
                     "ka_over_kc", "offdiag_tolerance", "crb_tolerance", "crb_band", "psd_tolerance"});
    LineValidationConfig& v = c.validation;
    s.integer("pixels", v.n);
    s.integer("bin_step", v.bin_step);
    s.integer("n_modes", v.n_modes);
    s.number("cutoff_bins", v.cutoff_bins);
    s.number("pixel_nm", v.dx);
    s.unsigned64("seed", v.seed);
    s.number("min_over_max", v.min_over_max);
    s.number("alpha", v.alpha);
    s.number("ka_over_kc", v.inner_radius_ratio);
    s.number("offdiag_tolerance", v.offdiag_tolerance);
    s.number("crb_tolerance", v.crb_tolerance);
    s.number("crb_band", v.crb_band);
    s.number("psd_tolerance", v.psd_tolerance);
    require(v.n >= 16, s.at("pixels"), "must be at least 16");
    require(v.bin_step >= 1, s.at("bin_step"), "must be positive");
    require(v.n_modes >= 1, s.at("n_modes"), "must be positive");
    require(v.cutoff_bins > 0 && v.cutoff_bins < v.n / 2.0, s.at("cutoff_bins"), "must lie in (0, pixels/2)");
    require(v.dx > 0, s.at("pixel_nm"), "must be positive");
    require(v.min_over_max > 0 && v.min_over_max <= 1, s.at("min_over_max"), "must lie in (0, 1]");
    require(v.alpha >= 0 && v.alpha <= 1, s.at("alpha"), "must lie in [0, 1]");
    require(v.inner_radius_ratio > 0 && v.inner_radius_ratio < 1, s.at("ka_over_kc"), "must lie in (0, 1)");
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + err.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["optics"] = {{"wavelength_nm", c.wavelength_nm}, {"numerical_aperture", c.numerical_aperture}};
  j["grid"] = {{"pixels", c.grid_pixels}, {"pixel_nm", c.pixel_nm}};
  json modes = json::array();
  for (const ModeConfig& m : c.modes) {
    modes.push_back({{"kx_over_kc", m.kx_over_kc},
                     {"ky_over_kc", m.ky_over_kc},
                     {"a_over_a0", m.a_over_a0},
                     {"b_over_a0", m.b_over_a0}});
  }
  j["sample"] = {{"kind", c.sample == SampleKind::chart ? "chart" : "modes"},
                 {"chart",
                  {{"lines_per_mm", c.chart.lines_per_mm},
                   {"n_lines", c.chart.n_lines},
                   {"orientation", c.chart.orientation == Orientation::vertical ? "vertical" : "horizontal"},
                   {"background", c.chart.background},
                   {"line_length_pitches", c.chart.line_length_pitches}}},
                 {"modes", modes}};
  j["partition"] = {{"ka_over_kc", c.ka_over_kc}, {"footprint_nm", c.footprint_nm}, {"canvas_pixels", c.canvas_pixels}};
  j["acquisition"] = {{"photons", c.acquisition.photons},
                      {"alpha", c.acquisition.alpha},
                      {"seed", c.acquisition.seed},
                      {"trials", c.trials},
                      {"read_noise_counts", c.acquisition.read_noise}};
  j["reconstruction"] = {{"iterations", c.reconstruction.iterations},
                         {"epsilon_floor", c.reconstruction.epsilon_floor},
                         {"band_limit", c.reconstruction.band_limit}};
  j["budget"] = {{"roughness", c.budget.roughness},
                 {"gamma", c.budget.gamma},
                 {"alphas", c.budget.alphas},
                 {"ka_over_kc_grid", c.budget.inner_radius_ratios},
                 {"grid_pixels", c.budget.grid_n}};
  j["analysis"] = {{"k_over_kc", c.analysis_k_over_kc}};
  const LineValidationConfig& v = c.validation;
  j["validation"] = {{"pixels", v.n},
                     {"bin_step", v.bin_step},
                     {"n_modes", v.n_modes},
                     {"cutoff_bins", v.cutoff_bins},
                     {"pixel_nm", v.dx},
                     {"seed", v.seed},
                     {"min_over_max", v.min_over_max},
                     {"alpha", v.alpha},
                     {"ka_over_kc", v.inner_radius_ratio},
                     {"offdiag_tolerance", v.offdiag_tolerance},
                     {"crb_tolerance", v.crb_tolerance},
                     {"crb_band", v.crb_band},
                     {"psd_tolerance", v.psd_tolerance}};
  return j;
}

bool CommandResult::ok() const {
  for (const auto& [name, pass] : invariants) {
    if (!pass) return false;
  }
  return true;
}

int exit_code_for(const CommandResult& result) { return result.ok() ? 0 : 3; }

CommandResult run_command(const std::string& name, ExperimentConfig cfg, const CommandOptions& options) {
  static const std::set<std::string> known = {"otf", "fisher", "budget", "simulate", "reconstruct", "snr", "validate"};
  if (!known.count(name)) throw ConfigError("command", "unknown subcommand '" + name + "'");
  if (options.trials) {
    if (*options.trials < 1) throw ConfigError("--trials", "must be at least 1");
    cfg.trials = *options.trials;
  }
  if (options.seed) {
    cfg.acquisition.seed = *options.seed;
    cfg.validation.seed = *options.seed;
  }
  // Round-trip through the serialized form so the manifest config is exactly
  // what ran.
  cfg = parse_config(config_to_json(cfg));

  CommandResult result;
  result.command = name;
  Outputs out(options.out, result);
  if (name == "validate") {
    cmd_validate(cfg, out, result);
  } else {
    Experiment e = [&] {
      try {
        return build(cfg);
      } catch (const ConfigError&) {
        throw;
      } catch (const InvalidArgument& err) {
        throw ConfigError("/", err.what());
      }
    }();
    if (name == "otf") cmd_otf(e, cfg, out, result);
    if (name == "fisher") cmd_fisher(e, cfg, out, result);
    if (name == "budget") cmd_budget(e, cfg, out, result);
    if (name == "simulate") cmd_simulate(e, cfg, out, result);
    if (name == "reconstruct") cmd_reconstruct(e, cfg, out, result);
    if (name == "snr") cmd_snr(e, cfg, out, result);
    result.summary["cutoff_rad_per_nm"] = e.optics.cutoff();
    result.summary["pixel_nm"] = e.grid.dx();
  }
  for (const auto& [inv, pass] : result.invariants) {
    if (!pass) result.failures.push_back("invariant failed: " + inv);
  }

  json manifest;
  manifest["command"] = name;
  manifest["config"] = config_to_json(cfg);
  manifest["seeds"] = seeds_json(cfg, name);
  json artifacts = json::array();
  for (const fs::path& p : result.artifacts) {
    artifacts.push_back({{"file", fs::relative(p, options.out).generic_string()}, {"fnv1a64", file_digest(p)}});
  }
  manifest["artifacts"] = artifacts;
  manifest["summary"] = result.summary;
  manifest["invariants"] = result.invariants;
  manifest["failures"] = result.failures;
  manifest["status"] = result.ok() ? "ok" : "invariant_failure";
  std::ofstream mf(options.out / "manifest.json");
  if (!mf) throw std::runtime_error("cannot write manifest");
  mf << manifest.dump(2) << '\n';
  return result;
}

}  // namespace fdd
