#include "fdd/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "fdd/error.hpp"

namespace fdd {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int nx, int ny, Direction dir) {
    const auto key = std::make_tuple(nx, ny, dir == Direction::forward);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> scratch(static_cast<std::size_t>(nx) * ny);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = ny == 1 ? fftw_plan_dft_1d(nx, buf, buf, sign, flags)
                             : fftw_plan_dft_2d(ny, nx, buf, buf, sign, flags);
    if (plan == nullptr) throw NumericalError("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<Complex> execute(std::span<const Complex> data, int nx, int ny, Direction dir) {
  std::vector<Complex> out(data.begin(), data.end());
  fftw_plan plan = plan_cache().get(nx, ny, dir);
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, buf, buf);
  return out;
}

}  // namespace

std::vector<Complex> dft2(std::span<const Complex> data, int nx, int ny, Direction dir) {
  if (data.size() != static_cast<std::size_t>(nx) * ny) {
    throw InvalidArgument("dft2: data size does not match dimensions");
  }
  return execute(data, nx, ny, dir);
}

std::vector<Complex> dft1(std::span<const Complex> data, Direction dir) {
  return execute(data, static_cast<int>(data.size()), 1, dir);
}

SpectralField fft_forward(const RealField& field) {
  const GridSpec& g = field.grid();
  std::vector<Complex> buf(g.size());
  auto values = field.values();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvalidArgument("fft_forward: non-finite input");
    buf[i] = values[i];
  }
  auto out = execute(buf, g.nx(), g.ny(), Direction::forward);
  const double scale = g.cell_area();
  for (auto& v : out) v *= scale;
  return SpectralField(g, std::move(out));
}

RealField fft_inverse(const SpectralField& spectrum, double* imag_residual) {
  const GridSpec& g = spectrum.grid();
  auto out = execute(spectrum.values(), g.nx(), g.ny(), Direction::backward);
  const double scale = 1.0 / (static_cast<double>(g.size()) * g.cell_area());
  std::vector<double> re(out.size());
  double max_re = 0.0;
  double max_im = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    re[i] = out[i].real() * scale;
    max_re = std::max(max_re, std::abs(re[i]));
    max_im = std::max(max_im, std::abs(out[i].imag() * scale));
  }
  if (imag_residual != nullptr) *imag_residual = max_re > 0.0 ? max_im / max_re : max_im;
  return RealField(g, std::move(re));
}

}  // namespace fdd
