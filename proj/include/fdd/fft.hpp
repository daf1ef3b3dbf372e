#pragma once

#include <span>
#include <vector>

#include "fdd/field.hpp"

namespace fdd {

enum class Direction { forward, backward };

/// Unscaled 2D DFT of a row-major nx-by-ny array (x fastest). Forward uses
/// exp(-i k.r), backward exp(+i k.r).
std::vector<Complex> dft2(std::span<const Complex> data, int nx, int ny, Direction dir);

/// Unscaled 1D DFT.
std::vector<Complex> dft1(std::span<const Complex> data, Direction dir);

/// Continuous-convention transform F(k) = sum f(r) exp(-i k.r) dx^2.
/// Throws InvalidArgument on non-finite input.
SpectralField fft_forward(const RealField& field);

/// Inverse of fft_forward, f(r) = sum F(k) exp(i k.r) dk^2 / (2 pi)^2.
/// Returns the real part; the largest |imag| relative to the largest |real|
/// is written to `imag_residual` when given.
RealField fft_inverse(const SpectralField& spectrum, double* imag_residual = nullptr);

}  // namespace fdd
