#pragma once

#include <complex>
#include <vector>

#include "taf/field.hpp"

namespace taf {

/// Discrete transforms, spectral calculus, dealiased products, and norm
/// quadrature on TorusGrid fields. DFTs are delegated to FFTW behind this
/// surface; plan creation is serialized internally, so all functions here
/// are safe to call concurrently on distinct inputs.

/// Forward DFT per component (unnormalized; see SpectralField docs).
/// Rejects non-finite input.
SpectralField transform(const RealField& field);

/// Inverse DFT per component, carrying the 1/N normalization. The imaginary
/// residue of a conjugate-symmetric input is discarded.
RealField inverse(const SpectralField& field);

/// Spectral derivative of order 1 or 2 along `axis`: multiplication by
/// (i k)^order. The unsigned Nyquist bin is annihilated for both orders so
/// that derivative(derivative(F,a,1),a,1) == derivative(F,a,2) holds exactly
/// in coefficient space and first derivatives of real fields stay real.
SpectralField derivative(const SpectralField& field, int axis, int order);
RealField derivative(const RealField& field, int axis, int order);

/// Largest retained wavenumber of the two-thirds dealiasing rule for axis
/// size n. (n-1)/3 rather than n/3 keeps quadratic aliases strictly outside
/// the retained band for every even n.
int dealias_cutoff(int n);

/// Zero all modes with |k_axis| > dealias_cutoff along any axis.
void dealias_inplace(SpectralField& field);
RealField dealias(const RealField& field);

/// Pointwise product with the two-thirds rule applied to both factors and
/// to the result, so the returned samples are those of the exactly
/// truncated product of the truncated factors. Scalar*scalar or
/// scalar*tensor (the scalar must be argument `a`).
RealField dealiased_product(const RealField& a, const RealField& b);

/// L^q norm by rectangle-rule quadrature; q >= 1, q = infinity gives the
/// max of the pointwise Euclidean magnitude over components.
double lq_norm(const RealField& field, double q);

/// Space-time L^q norm over [times.front(), times.back()] with trapezoidal
/// time quadrature of the instantaneous q-th powers.
double lq_time_norm(const std::vector<double>& times, const std::vector<RealField>& fields,
                    double q);

/// L^2 inner product (all components).
double inner_product(const RealField& a, const RealField& b);

/// Mean (k=0 mode) of a scalar field times the domain volume, i.e. the
/// integral over the torus.
double integral(const RealField& field);

/// Projection onto the span of Laplacian eigenfunctions with eigenvalue
/// |k|^2 <= n_cut^2; idempotent and orthogonal.
SpectralField galerkin_project(const SpectralField& field, int n_cut);
RealField galerkin_project(const RealField& field, int n_cut);

/// Trigonometric interpolation onto another grid of the same dims:
/// coefficient injection (or truncation) with the normalization adjusted.
RealField resample(const RealField& field, const TorusGrid& target);

namespace detail {
/// In-place complex DFT along one axis of a (possibly multi-component)
/// lattice; sign = -1 forward, +1 inverse (both unnormalized).
void fft_axis(std::complex<double>* data, const TorusGrid& grid, std::size_t components,
              int axis, int sign);
}  // namespace detail

}  // namespace taf
