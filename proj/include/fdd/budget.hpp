#pragma once

#include <filesystem>
#include <vector>

#include "fdd/optics.hpp"

namespace fdd {

struct BudgetParams {
  /// Coefficient of variation std(f) / a0 of the sample.
  double roughness = 0.4;
  /// SNR threshold.
  double gamma = 3.0;
  std::vector<double> alphas;
  std::vector<double> inner_radius_ratios;
  /// Grid size for the OTFs (k_c * dx = 0.8 pi).
  int grid_n = 512;

  /// alpha in {0, 0.05, ..., 1}, k_a/k_c in {0.3, 0.35, ..., 0.95}.
  static BudgetParams defaults();
  void validate() const;
};

/// 8 * 0.61^2 * pi^2 * gamma^2 / R^2, the photons per Airy disk at k -> 0.
double budget_constant(const BudgetParams& params);

/// DI minimum photons per Airy-disk area to resolve up to k: the constant times
/// the max of beta(0) / beta(k_i)^2 over axis bins with |k_i| < k. Infinite for
/// k >= k_c.
double n_min_di(double k, const BudgetParams& params, const Otf& otf_di);

struct FddBudget {
  double photons = 0.0;
  double alpha = 0.0;
  double inner_radius_ratio = 0.0;
};

enum class ImagingMethod { di, fdd };

/// Axis profiles of the DI and all hybrid configurations, precomputed once so
/// repeated budget queries are cheap.
class BudgetModel {
 public:
  BudgetModel(const OpticsSpec& optics, const BudgetParams& params);

  const BudgetParams& params() const { return params_; }
  double cutoff() const { return cutoff_; }
  double dk() const { return dk_; }
  /// Number of axis bins below the cutoff.
  int bins() const { return static_cast<int>(di_running_.size()); }

  double n_min_di(double k) const;
  FddBudget n_min_fdd(double k) const;
  /// Largest k whose budget fits within `photons`, as 2 pi / k (nm). Throws
  /// when not even the lowest frequency is affordable.
  double resolution_for_budget(double photons, ImagingMethod method) const;

 private:
  int bins_below(double k) const;

  BudgetParams params_;
  double cutoff_ = 0.0;
  double dk_ = 0.0;
  double constant_ = 0.0;
  /// Running max of 1 / S over bins 0..m.
  std::vector<double> di_running_;
  std::vector<FddBudget> fdd_running_;
};

FddBudget n_min_fdd(double k, const BudgetParams& params, const OpticsSpec& optics);
double resolution_for_budget(double photons, ImagingMethod method, const BudgetParams& params,
                             const OpticsSpec& optics);

struct BudgetPoint {
  double resolution = 0.0;
  double k = 0.0;
  double n_di = 0.0;
  double n_fdd = 0.0;
  double alpha = 0.0;
  double inner_radius_ratio = 0.0;
};

/// One point per axis bin k = m dk, m = 1 .. below the cutoff.
std::vector<BudgetPoint> budget_curve(const BudgetModel& model);

struct ResolutionSweepPoint {
  double photons = 0.0;
  double resolution_di = 0.0;
  double resolution_fdd = 0.0;
};

/// Achievable resolution of both methods over `points` log-spaced budgets from
/// the affordability floor up to the DI budget of the last bin below k_c.
std::vector<ResolutionSweepPoint> resolution_sweep(const BudgetModel& model, int points = 400);

/// Columns resolution_nm, k, k_over_kc, n_min_DI, n_min_FDD, ratio, alpha_star,
/// ka_star.
void write_budget_csv(const std::filesystem::path& path, const BudgetModel& model);

}  // namespace fdd
