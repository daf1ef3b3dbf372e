#include "fdd/line_validation.hpp"

#include <cmath>
#include <fstream>

#include "fdd/error.hpp"

namespace fdd {
namespace {

MatrixComparison compare(FisherMatrix numeric, Eigen::VectorXd analytic,
                         const std::vector<bool>& in_band) {
  MatrixComparison c;
  const Eigen::MatrixXd& m = numeric.values;
  const Eigen::VectorXd d = m.diagonal();
  const double diag2 = d.squaredNorm();
  const double off2 = m.squaredNorm() - diag2;
  c.offdiag_ratio = std::sqrt(std::max(off2, 0.0) / diag2);

  const Eigen::Index p = m.rows();
  double corr2 = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i != j) corr2 += m(i, j) * m(i, j) / (d(i) * d(j));
    }
  }
  c.rms_correlation = std::sqrt(corr2 / static_cast<double>(p * (p - 1)));

  const Eigen::Index l = p / 2;
  for (Eigen::Index i = 0; i < l; ++i) {
    if (in_band[i]) c.cos_sin_deviation = std::max(c.cos_sin_deviation, std::abs(d(i) / d(l + i) - 1.0));
  }
  c.crb_ratio = numeric.crb_diagonal().cwiseProduct(analytic);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (in_band[i % l]) c.crb_max_deviation = std::max(c.crb_max_deviation, std::abs(c.crb_ratio(i) - 1.0));
  }
  c.numeric = std::move(numeric);
  c.analytic = std::move(analytic);
  return c;
}

}  // namespace

bool LineValidationReport::offdiag_ok() const {
  const double t = config.offdiag_tolerance;
  return qfi.offdiag_ratio < t && fi_di.offdiag_ratio < t && fi_hybrid.offdiag_ratio < t;
}

bool LineValidationReport::crb_ok() const { return failing_bins.empty(); }

bool LineValidationReport::psd_ok() const {
  return min_eig_qfi_minus_di >= config.psd_tolerance &&
         min_eig_qfi_minus_hybrid >= config.psd_tolerance;
}

LineValidationReport run_line_validation(const LineValidationConfig& cfg) {
  if (cfg.n_modes < 1 || cfg.bin_step < 1) throw InvalidArgument("need at least one mode");
  if (!(cfg.cutoff_bins > 0.0 && cfg.cutoff_bins < cfg.n / 2.0)) {
    throw InvalidArgument("cutoff must lie below the line Nyquist frequency");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  LineValidationReport r;
  r.config = cfg;
  r.line = Line1D{cfg.n, cfg.dx};

  std::vector<int> bins;
  for (int i = 1; i <= cfg.n_modes; ++i) bins.push_back(i * cfg.bin_step);
  if (bins.back() >= cfg.cutoff_bins) throw InvalidArgument("highest mode lies beyond the cutoff");
  r.sample = random_sample_1d(r.line, bins, cfg.seed, cfg.min_over_max);
  const Eigen::VectorXd f = synthesize_1d(r.sample, r.line);
  const std::span<const double> fs(f.data(), static_cast<std::size_t>(f.size()));

  const double radius = cfg.cutoff_bins / 2.0;
  const double inner = cfg.inner_radius_ratio * radius;
  const Eigen::VectorXd full = band_indicator_1d(r.line, 0.0, radius);
  const double count = full.sum();
  const Eigen::VectorXd central = band_indicator_1d(r.line, 0.0, inner);
  const Eigen::VectorXd outer = full - central;

  const Eigen::VectorXd apsf = apsf_1d(full, count);
  const DensityOperator1D rho = build_density_operator_1d(fs, r.line, apsf);
  r.support_size = rho.eigenvalues.size();
  r.trace = rho.matrix.trace();
  r.min_density_eigenvalue = rho.min_eigenvalue;

  const Eigen::MatrixXd w = mode_derivative_weights_1d(r.sample, r.line);
  const auto labels = mode_labels_1d(r.sample);
  FisherMatrix qfi = qfi_numeric_1d(rho, w, labels);

  const double photons = 1.0;
  FisherMatrix di = fi_numeric({detection_channel_1d(apsf, fs, w, r.line, 1.0)}, photons, labels);
  std::vector<DetectionChannel> hybrid_channels = {
      detection_channel_1d(apsf, fs, w, r.line, 1.0 - cfg.alpha)};
  for (const Eigen::VectorXd* region : {&central, &outer}) {
    if (region->sum() > 0.0) {
      hybrid_channels.push_back(
          detection_channel_1d(apsf_1d(*region, count), fs, w, r.line, cfg.alpha));
    }
  }
  FisherMatrix hybrid = fi_numeric(hybrid_channels, photons, labels);

  // Analytic diagonals from the 1D OTFs of the same pupils.
  const Eigen::VectorXd b_di = otf_1d(full, count);
  const Eigen::VectorXd b_c = otf_1d(central, count);
  const Eigen::VectorXd b_o = otf_1d(outer, count);
  const Eigen::Index l = static_cast<Eigen::Index>(bins.size());
  const double a0 = r.sample.a0;
  Eigen::VectorXd aq(2 * l), ad(2 * l), ah(2 * l);
  std::vector<bool> in_band(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const int m = bins[i];
    const double bd = b_di(m);
    double raw = 0.0;
    if (b_c(0) > 0.0) raw += b_c(m) * b_c(m) / b_c(0);
    if (b_o(0) > 0.0) raw += b_o(m) * b_o(m) / b_o(0);
    const double s = 1.0 / (2.0 * a0 * a0);
    aq(i) = aq(l + i) = bd * s;
    ad(i) = ad(l + i) = bd * bd / b_di(0) * s;
    ah(i) = ah(l + i) = (cfg.alpha * raw + (1.0 - cfg.alpha) * bd * bd / b_di(0)) * s;
    in_band[i] = m <= cfg.crb_band * cfg.cutoff_bins;
  }

  r.min_eig_qfi_minus_di = FisherMatrix{{}, qfi.values - di.values}.min_eigenvalue() /
                           qfi.values.diagonal().maxCoeff();
  r.min_eig_qfi_minus_hybrid = FisherMatrix{{}, qfi.values - hybrid.values}.min_eigenvalue() /
                               qfi.values.diagonal().maxCoeff();
  r.qfi = compare(std::move(qfi), std::move(aq), in_band);
  r.fi_di = compare(std::move(di), std::move(ad), in_band);
  r.fi_hybrid = compare(std::move(hybrid), std::move(ah), in_band);

  for (Eigen::Index i = 0; i < l; ++i) {
    if (!in_band[i]) continue;
    for (const MatrixComparison* c : {&r.qfi, &r.fi_di, &r.fi_hybrid}) {
      if (std::abs(c->crb_ratio(i) - 1.0) > cfg.crb_tolerance ||
          std::abs(c->crb_ratio(l + i) - 1.0) > cfg.crb_tolerance) {
        r.failing_bins.push_back(bins[i]);
        break;
      }
    }
  }
  return r;
}

void write_line_validation_csv(const std::filesystem::path& path, const LineValidationReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "parameter,k,k_over_kc,QCRB_analytic,QCRB_numeric,CRB_DI_analytic,CRB_DI_numeric,"
         "CRB_hybrid_analytic,CRB_hybrid_numeric\n";
  out.precision(10);
  const Eigen::Index l = static_cast<Eigen::Index>(r.sample.bins.size());
  const double dk = r.line.dk();
  for (Eigen::Index i = 0; i < 2 * l; ++i) {
    const int m = r.sample.bins[i % l];
    out << r.qfi.numeric.labels[i] << ',' << m * dk << ',' << m / r.config.cutoff_bins;
    for (const MatrixComparison* c : {&r.qfi, &r.fi_di, &r.fi_hybrid}) {
      const double analytic = 1.0 / c->analytic(i);
      out << ',' << analytic << ',' << analytic * c->crb_ratio(i);
    }
    out << '\n';
  }
}

}  // namespace fdd
