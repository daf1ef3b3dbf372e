#include "fdd/fisher_numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fdd/error.hpp"
#include "fdd/fft.hpp"

namespace fdd {

using std::numbers::pi;

namespace {

constexpr double kSupportThreshold = 1e-12;
constexpr double kDegeneracy = 1e-6;

int signed_bin(int i, int n) { return i < n / 2 ? i : i - n; }

Eigen::MatrixXd circulant(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = v((i - j + n) % n);
  }
  return m;
}

// Shared eigenbasis assembly. X[i] = drho_i * V_S for each parameter.
Eigen::MatrixXd assemble_qfi(const Eigen::VectorXd& xi, const Eigen::MatrixXd& vs,
                             const std::vector<Eigen::MatrixXd>& x) {
  const Eigen::Index s = xi.size();
  const Eigen::Index p = static_cast<Eigen::Index>(x.size());
  const double xmax = xi.maxCoeff();

  Eigen::MatrixXd kernel(s, s);
  for (Eigen::Index l = 0; l < s; ++l) {
    for (Eigen::Index m = 0; m < s; ++m) {
      const double a = xi(l);
      const double b = xi(m);
      if (l == m) {
        kernel(l, m) = 1.0 / a;
      } else if (std::abs(a - b) < kDegeneracy * xmax) {
        kernel(l, m) = 2.0 / (a + b);
      } else {
        kernel(l, m) = (4.0 * a - 8.0 * a * b / (a + b)) / ((a - b) * (a - b));
      }
    }
  }

  Eigen::MatrixXd dv(p, s * s);
  Eigen::MatrixXd qv(p, vs.rows() * s);
  const Eigen::VectorXd inv_sqrt = xi.cwiseSqrt().cwiseInverse();
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::MatrixXd d = vs.transpose() * x[i];
    Eigen::MatrixXd q = x[i] - vs * d;
    q = q * inv_sqrt.asDiagonal();
    dv.row(i) = Eigen::Map<const Eigen::VectorXd>(d.data(), d.size()).transpose();
    qv.row(i) = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size()).transpose();
  }
  const Eigen::VectorXd kv = Eigen::Map<const Eigen::VectorXd>(kernel.data(), kernel.size());
  Eigen::MatrixXd out = (dv * kv.asDiagonal()) * dv.transpose();
  out.noalias() += 4.0 * qv * qv.transpose();
  return 0.5 * (out + out.transpose());
}

void support(const Eigen::MatrixXd& rho, Eigen::VectorXd& xi, Eigen::MatrixXd& vs,
             double* min_eig = nullptr) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (min_eig) *min_eig = ev.minCoeff();
  const double cut = kSupportThreshold * ev.maxCoeff();
  Eigen::Index first = 0;
  while (first < ev.size() && ev(first) <= cut) ++first;
  xi = ev.tail(ev.size() - first);
  vs = es.eigenvectors().rightCols(ev.size() - first);
}

}  // namespace

double Line1D::dk() const { return 2.0 * pi / (n * dx); }

Eigen::VectorXd synthesize_1d(const Sample1D& s, const Line1D& line) {
  if (s.a.size() != s.bins.size() || s.b.size() != s.bins.size()) {
    throw InvalidArgument("1D sample coefficient arrays differ in length");
  }
  Eigen::VectorXd f = Eigen::VectorXd::Constant(line.n, s.a0);
  for (std::size_t i = 0; i < s.bins.size(); ++i) {
    for (int x = 0; x < line.n; ++x) {
      const double ph = 2.0 * pi * static_cast<double>((static_cast<long>(s.bins[i]) * x) % line.n) / line.n;
      f(x) += s.a[i] * std::cos(ph) + s.b[i] * std::sin(ph);
    }
  }
  return f;
}

Sample1D random_sample_1d(const Line1D& line, std::vector<int> bins, std::uint64_t seed,
                          double min_over_max) {
  if (!(min_over_max > 0.0 && min_over_max < 1.0)) {
    throw InvalidArgument("min/max ratio must lie in (0, 1)");
  }
  for (int b : bins) {
    if (b <= 0 || b >= line.n / 2) throw InvalidArgument("1D mode bin outside (0, n/2)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Sample1D s;
  s.bins = std::move(bins);
  for (std::size_t i = 0; i < s.bins.size(); ++i) s.a.push_back(normal(rng));
  for (std::size_t i = 0; i < s.bins.size(); ++i) s.b.push_back(normal(rng));
  s.a0 = 0.0;
  const Eigen::VectorXd var = synthesize_1d(s, line);
  const double mx = var.maxCoeff();
  const double mn = var.minCoeff();
  // a0 + mn = r (a0 + mx)
  s.a0 = (min_over_max * mx - mn) / (1.0 - min_over_max);
  const double scale = 1.0 / (s.a0 * line.length());
  s.a0 *= scale;
  for (double& v : s.a) v *= scale;
  for (double& v : s.b) v *= scale;
  return s;
}

Eigen::VectorXd band_indicator_1d(const Line1D& line, double lo_bins, double hi_bins) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(line.n);
  for (int i = 0; i < line.n; ++i) {
    const double m = std::abs(signed_bin(i, line.n));
    if (m >= lo_bins && m <= hi_bins) h(i) = 1.0;
  }
  return h;
}

Eigen::VectorXd apsf_1d(const Eigen::VectorXd& indicator, double full_count) {
  const int n = static_cast<int>(indicator.size());
  std::vector<Complex> h(indicator.data(), indicator.data() + n);
  const auto psi = dft1(h, Direction::backward);
  const double scale = std::sqrt(static_cast<double>(n) / full_count) / n;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = psi[i].real() * scale;
  return out;
}

Eigen::VectorXd otf_1d(const Eigen::VectorXd& indicator, double full_count) {
  const int n = static_cast<int>(indicator.size());
  Eigen::VectorXd out(n);
  for (int m = 0; m < n; ++m) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += indicator(i) * indicator((i + m) % n);
    out(m) = c / full_count;
  }
  return out;
}

DensityOperator1D build_density_operator_1d(std::span<const double> f, const Line1D& line,
                                            const Eigen::VectorXd& apsf) {
  if (static_cast<int>(f.size()) != line.n || apsf.size() != line.n) {
    throw InvalidArgument("sample, APSF and line sizes differ");
  }
  const double peak = *std::max_element(f.begin(), f.end());
  for (double v : f) {
    if (!std::isfinite(v)) throw InvalidArgument("sample has non-finite values");
    if (v < -1e-12 * std::abs(peak)) throw InvalidArgument("sample intensity is negative");
  }
  DensityOperator1D rho;
  rho.line = line;
  rho.shifted = circulant(apsf);
  rho.weights.resize(line.n);
  for (int j = 0; j < line.n; ++j) rho.weights(j) = std::max(f[j], 0.0) * line.dx;
  rho.raw_trace = rho.weights.sum() * apsf.squaredNorm();
  if (!(rho.raw_trace > 0.0)) throw InvalidArgument("sample carries no photons");
  rho.weights /= rho.raw_trace;
  rho.matrix = rho.shifted * rho.weights.asDiagonal() * rho.shifted.transpose();
  support(rho.matrix, rho.eigenvalues, rho.eigenvectors, &rho.min_eigenvalue);
  return rho;
}

double FisherMatrix::symmetry_defect() const {
  const double scale = values.cwiseAbs().maxCoeff();
  return scale > 0.0 ? (values - values.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
}

double FisherMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd FisherMatrix::crb_diagonal() const {
  return values.ldlt().solve(Eigen::MatrixXd::Identity(values.rows(), values.cols())).diagonal();
}

Eigen::MatrixXd mode_derivative_weights_1d(const Sample1D& s, const Line1D& line) {
  const int l = static_cast<int>(s.bins.size());
  Eigen::MatrixXd w(line.n, 2 * l);
  for (int i = 0; i < l; ++i) {
    for (int x = 0; x < line.n; ++x) {
      const double ph = 2.0 * pi * static_cast<double>((static_cast<long>(s.bins[i]) * x) % line.n) / line.n;
      w(x, i) = std::cos(ph) * line.dx;
      w(x, l + i) = std::sin(ph) * line.dx;
    }
  }
  return w;
}

std::vector<std::string> mode_labels_1d(const Sample1D& s) {
  std::vector<std::string> out;
  for (int b : s.bins) out.push_back("a_" + std::to_string(b));
  for (int b : s.bins) out.push_back("b_" + std::to_string(b));
  return out;
}

FisherMatrix qfi_numeric_1d(const DensityOperator1D& rho, const Eigen::MatrixXd& weights,
                            std::vector<std::string> labels) {
  if (weights.rows() != rho.line.n) throw InvalidArgument("derivative weights have wrong length");
  // d rho_i V_S = Phi diag(c_i) (V_S^T Phi)^T, scaled like the weights of rho.
  const Eigen::MatrixXd ws = rho.eigenvectors.transpose() * rho.shifted;
  std::vector<Eigen::MatrixXd> x;
  x.reserve(weights.cols());
  for (Eigen::Index i = 0; i < weights.cols(); ++i) {
    const Eigen::VectorXd c = weights.col(i) / rho.raw_trace;
    x.push_back(rho.shifted * c.asDiagonal() * ws.transpose());
  }
  return {std::move(labels), assemble_qfi(rho.eigenvalues, rho.eigenvectors, x)};
}

Eigen::MatrixXd qfi_from_operators(const Eigen::MatrixXd& rho,
                                   const std::vector<Eigen::MatrixXd>& derivatives) {
  auto check = [](const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols()) throw InvalidArgument(std::string(what) + " is not square");
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidArgument(std::string(what) + " is not Hermitian");
    }
  };
  check(rho, "density operator");
  for (const auto& d : derivatives) {
    check(d, "density derivative");
    if (d.rows() != rho.rows()) throw InvalidArgument("derivative size differs from rho");
  }
  Eigen::VectorXd xi;
  Eigen::MatrixXd vs;
  support(rho, xi, vs);
  std::vector<Eigen::MatrixXd> x;
  for (const auto& d : derivatives) x.push_back(d * vs);
  return assemble_qfi(xi, vs, x);
}

FisherMatrix fi_numeric(const std::vector<DetectionChannel>& channels, double photons,
                        std::vector<std::string> labels) {
  if (channels.empty()) throw InvalidArgument("no detection channels");
  if (!(photons > 0.0)) throw InvalidArgument("photon count must be positive");
  const Eigen::Index p = channels[0].derivatives.cols();
  Eigen::MatrixXd fi = Eigen::MatrixXd::Zero(p, p);
  for (const auto& ch : channels) {
    if (ch.derivatives.cols() != p || ch.derivatives.rows() != ch.mean.size()) {
      throw InvalidArgument("channel derivative shape mismatch");
    }
    const double peak = ch.mean.maxCoeff();
    if (!(peak > 0.0)) {
      if (ch.derivatives.cwiseAbs().maxCoeff() == 0.0) continue;
      throw InvalidArgument("channel mean image is nonpositive");
    }
    const Eigen::VectorXd inv = ch.mean.cwiseMax(1e-12 * peak).cwiseInverse();
    fi.noalias() += ch.derivatives.transpose() * inv.asDiagonal() * ch.derivatives;
  }
  fi /= photons;
  return {std::move(labels), 0.5 * (fi + fi.transpose())};
}

DetectionChannel detection_channel_1d(const Eigen::VectorXd& apsf, std::span<const double> f,
                                      const Eigen::MatrixXd& weights, const Line1D& line,
                                      double fraction) {
  const Eigen::MatrixXd psf = circulant(apsf.cwiseAbs2());
  const Eigen::VectorXd w =
      Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())) * line.dx;
  return {fraction * psf * w, fraction * psf * weights};
}

}  // namespace fdd
