#include "fdd/budget.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "fdd/error.hpp"

namespace fdd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> step_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  return out;
}

}  // namespace

BudgetParams BudgetParams::defaults() {
  BudgetParams p;
  p.alphas = step_grid(0.0, 1.0, 0.05);
  p.inner_radius_ratios = step_grid(0.3, 0.95, 0.05);
  return p;
}

void BudgetParams::validate() const {
  if (!(roughness > 0.0)) throw InvalidArgument("coefficient of variation R must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("SNR threshold gamma must be positive");
  if (alphas.empty() || inner_radius_ratios.empty()) {
    throw InvalidArgument("budget search grids must be nonempty");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alpha grid values must lie in [0, 1]");
  }
  for (double r : inner_radius_ratios) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("k_a/k_c grid values must lie in (0, 1)");
  }
}

double budget_constant(const BudgetParams& p) {
  const double pi = std::numbers::pi;
  return 8.0 * 0.61 * 0.61 * pi * pi * p.gamma * p.gamma / (p.roughness * p.roughness);
}

double n_min_di(double k, const BudgetParams& params, const Otf& otf_di) {
  if (!(k > 0.0)) throw InvalidArgument("target frequency must be positive");
  if (k >= otf_di.cutoff()) return kInf;
  const auto profile = otf_di.axis_profile();
  const double dk = otf_di.grid().dkx();
  double worst = 0.0;
  for (int m = 0; m < static_cast<int>(profile.size()) && m * dk < k; ++m) {
    const double b = profile[m];
    worst = std::max(worst, b > 0.0 ? otf_di.dc() / (b * b) : kInf);
  }
  return budget_constant(params) * worst;
}

BudgetModel::BudgetModel(const OpticsSpec& optics, const BudgetParams& params)
    : params_(params), cutoff_(optics.cutoff()), constant_(budget_constant(params)) {
  params_.validate();
  const GridSpec grid = default_grid(optics, params_.grid_n);
  dk_ = grid.dkx();
  const PupilMask pupil = make_circular_pupil(optics, grid);
  const Otf full = compute_otf(pupil);
  const auto di = full.axis_profile();
  int nb = 0;
  while (nb < static_cast<int>(di.size()) && nb * dk_ < cutoff_) ++nb;

  std::vector<double> di_term(nb);
  for (int m = 0; m < nb; ++m) di_term[m] = di[m] * di[m] / full.dc();
  di_running_.resize(nb);
  double worst = 0.0;
  for (int m = 0; m < nb; ++m) {
    worst = std::max(worst, di_term[m] > 0.0 ? 1.0 / di_term[m] : kInf);
    di_running_[m] = worst;
  }

  // The partition is geometric only; any canvas that fits serves.
  const GridSpec canvas(1024, 1024, grid.dx());
  std::vector<std::vector<double>> region_terms;
  for (double ratio : params_.inner_radius_ratios) {
    const auto regions = region_otfs(partition_fdd(pupil, ratio, canvas, 0.0));
    std::vector<double> t(nb, 0.0);
    for (const Otf& r : regions) {
      if (!(r.dc() > 0.0)) continue;
      const auto p = r.axis_profile();
      for (int m = 0; m < nb; ++m) t[m] += p[m] * p[m] / r.dc();
    }
    region_terms.push_back(std::move(t));
  }

  fdd_running_.assign(nb, FddBudget{kInf, 0.0, 0.0});
  for (double alpha : params_.alphas) {
    for (std::size_t j = 0; j < region_terms.size(); ++j) {
      double run = 0.0;
      for (int m = 0; m < nb; ++m) {
        const double s = (1.0 - alpha) * di_term[m] + alpha * region_terms[j][m];
        run = std::max(run, s > 0.0 ? 1.0 / s : kInf);
        if (run < fdd_running_[m].photons) {
          fdd_running_[m] = {run, alpha, params_.inner_radius_ratios[j]};
        }
      }
    }
  }
}

int BudgetModel::bins_below(double k) const {
  int m = static_cast<int>(std::ceil(k / dk_ - 1e-9));
  return std::min(m, bins());
}

double BudgetModel::n_min_di(double k) const {
  if (!(k > 0.0)) throw InvalidArgument("target frequency must be positive");
  if (k >= cutoff_) return kInf;
  const int m = bins_below(k);
  return constant_ * di_running_[m - 1];
}

FddBudget BudgetModel::n_min_fdd(double k) const {
  if (!(k > 0.0)) throw InvalidArgument("target frequency must be positive");
  if (k >= cutoff_) return {kInf, 0.0, 0.0};
  FddBudget b = fdd_running_[bins_below(k) - 1];
  b.photons *= constant_;
  return b;
}

double BudgetModel::resolution_for_budget(double photons, ImagingMethod method) const {
  auto cost = [&](int m) {
    return constant_ * (method == ImagingMethod::di ? di_running_[m] : fdd_running_[m].photons);
  };
  if (!(photons >= cost(0))) {
    std::ostringstream msg;
    msg << "no frequency resolvable: budget " << photons
        << " photons per Airy disk is below the floor " << cost(0);
    throw InvalidArgument(msg.str());
  }
  // Largest m with cost(m) <= photons; the running max is nondecreasing.
  int lo = 0;
  int hi = bins() - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (cost(mid) <= photons) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const double k = std::min((lo + 1) * dk_, cutoff_);
  return 2.0 * std::numbers::pi / k;
}

FddBudget n_min_fdd(double k, const BudgetParams& params, const OpticsSpec& optics) {
  return BudgetModel(optics, params).n_min_fdd(k);
}

double resolution_for_budget(double photons, ImagingMethod method, const BudgetParams& params,
                             const OpticsSpec& optics) {
  return BudgetModel(optics, params).resolution_for_budget(photons, method);
}

std::vector<BudgetPoint> budget_curve(const BudgetModel& model) {
  std::vector<BudgetPoint> out;
  for (int m = 1; m < model.bins(); ++m) {
    const double k = m * model.dk();
    const FddBudget f = model.n_min_fdd(k);
    out.push_back({2.0 * std::numbers::pi / k, k, model.n_min_di(k), f.photons, f.alpha,
                   f.inner_radius_ratio});
  }
  return out;
}

std::vector<ResolutionSweepPoint> resolution_sweep(const BudgetModel& model, int points) {
  if (points < 2) throw InvalidArgument("resolution sweep needs at least two points");
  const double lo = budget_constant(model.params());
  const double hi = model.n_min_di((model.bins() - 0.5) * model.dk());
  std::vector<ResolutionSweepPoint> out;
  for (int i = 0; i < points; ++i) {
    const double photons = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    out.push_back({photons, model.resolution_for_budget(photons, ImagingMethod::di),
                   model.resolution_for_budget(photons, ImagingMethod::fdd)});
  }
  return out;
}

void write_budget_csv(const std::filesystem::path& path, const BudgetModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "resolution_nm,k,k_over_kc,n_min_DI,n_min_FDD,ratio,alpha_star,ka_star\n";
  out.precision(10);
  for (const auto& p : budget_curve(model)) {
    out << p.resolution << ',' << p.k << ',' << p.k / model.cutoff() << ',' << p.n_di << ','
        << p.n_fdd << ',' << p.n_di / p.n_fdd << ',' << p.alpha << ',' << p.inner_radius_ratio
        << '\n';
  }
}

}  // namespace fdd
