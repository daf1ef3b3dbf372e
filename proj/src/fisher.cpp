#include "fdd/fisher.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "fdd/error.hpp"

namespace fdd {
namespace {

void check_a0(double a0) {
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw InvalidArgument("a0 must be positive");
}

template <class F>
FisherDiagonal diagonal(const Otf& otf, double a0, std::span<const WaveVector> ks, F value) {
  check_a0(a0);
  FisherDiagonal out;
  out.a0 = a0;
  out.entries.reserve(2 * ks.size());
  for (const WaveVector& k : ks) {
    double v = 0.0;
    if (k.norm() > otf.cutoff()) {
      ++out.beyond_cutoff;
    } else {
      v = value(otf.value_at(k));
    }
    out.entries.push_back({k, ModeKind::cos, v});
    out.entries.push_back({k, ModeKind::sin, v});
  }
  return out;
}

void check_same_keys(const FisherDiagonal& a, const FisherDiagonal& b) {
  if (a.entries.size() != b.entries.size()) throw InvalidArgument("Fisher k grids differ in size");
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (!(a.entries[i].k == b.entries[i].k) || a.entries[i].mode != b.entries[i].mode) {
      throw InvalidArgument("Fisher k grids do not match");
    }
  }
}

}  // namespace

const char* to_string(ModeKind m) { return m == ModeKind::cos ? "cos" : "sin"; }

std::vector<WaveVector> axis_wavevectors(const GridSpec& grid, double max_k) {
  std::vector<WaveVector> out;
  for (int m = 1; m < grid.nx() / 2 && m * grid.dkx() <= max_k * (1.0 + 1e-12); ++m) {
    out.push_back({m * grid.dkx(), 0.0});
  }
  return out;
}

FisherDiagonal qfi_analytic(const Otf& otf_di, double a0, std::span<const WaveVector> ks) {
  const double s = 1.0 / (2.0 * a0 * a0);
  return diagonal(otf_di, a0, ks, [&](double b) { return b * s; });
}

FisherDiagonal fi_di_analytic(const Otf& otf_di, double a0, std::span<const WaveVector> ks) {
  const double s = 1.0 / (2.0 * a0 * a0 * otf_di.dc());
  return diagonal(otf_di, a0, ks, [&](double b) { return b * b * s; });
}

FisherDiagonal fi_pupil_analytic(const Otf& otf_l, double a0, std::span<const WaveVector> ks) {
  if (!(otf_l.dc() > 0.0)) throw InvalidArgument("pupil region is empty (beta_l(0) = 0)");
  return fi_di_analytic(otf_l, a0, ks);
}

FisherDiagonal fi_fdd_raw(std::span<const FisherDiagonal> per_pupil) {
  if (per_pupil.empty()) throw InvalidArgument("no pupils to sum");
  FisherDiagonal out = per_pupil[0];
  for (std::size_t p = 1; p < per_pupil.size(); ++p) {
    check_same_keys(out, per_pupil[p]);
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
      out.entries[i].value += per_pupil[p].entries[i].value;
    }
  }
  return out;
}

FisherDiagonal fi_hybrid(const FisherDiagonal& raw, const FisherDiagonal& di, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  check_same_keys(raw, di);
  FisherDiagonal out = di;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    out.entries[i].value = alpha * raw.entries[i].value + (1.0 - alpha) * di.entries[i].value;
  }
  return out;
}

std::vector<double> crb(const FisherDiagonal& fi, double photons) {
  if (!(photons > 0.0)) throw InvalidArgument("photon count must be positive");
  std::vector<double> out;
  out.reserve(fi.entries.size());
  for (const auto& e : fi.entries) {
    out.push_back(e.value > 0.0 ? 1.0 / (photons * e.value)
                                : std::numeric_limits<double>::infinity());
  }
  return out;
}

FisherTable fisher_table(const Otf& full, const std::array<Otf, 5>& regions, double a0,
                         double alpha, std::span<const WaveVector> ks) {
  FisherTable t;
  t.alpha = alpha;
  t.qfi = qfi_analytic(full, a0, ks);
  t.di = fi_di_analytic(full, a0, ks);
  std::vector<FisherDiagonal> per;
  for (const Otf& r : regions) {
    if (r.dc() > 0.0) per.push_back(fi_pupil_analytic(r, a0, ks));
  }
  t.raw = fi_fdd_raw(per);
  t.hybrid = fi_hybrid(t.raw, t.di, alpha);
  return t;
}

void write_fisher_csv(const std::filesystem::path& path, const FisherTable& t, double photons) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto q = crb(t.qfi, photons);
  const auto d = crb(t.di, photons);
  const auto r = crb(t.raw, photons);
  const auto h = crb(t.hybrid, photons);
  out << "kx,ky,mode,QFI,FI_DI,FI_FDD_raw,FI_hybrid,QCRB,CRB_DI,CRB_FDD_raw,CRB_hybrid,"
         "CRB_ratio_DI_over_hybrid\n";
  out.precision(10);
  for (std::size_t i = 0; i < t.qfi.entries.size(); ++i) {
    const auto& e = t.qfi.entries[i];
    const double ratio = std::isfinite(d[i]) ? d[i] / h[i] : std::nan("");
    out << e.k.x << ',' << e.k.y << ',' << to_string(e.mode) << ',' << e.value << ','
        << t.di.entries[i].value << ',' << t.raw.entries[i].value << ','
        << t.hybrid.entries[i].value << ',' << q[i] << ',' << d[i] << ',' << r[i] << ',' << h[i]
        << ',' << ratio << '\n';
  }
}

}  // namespace fdd
