#pragma once

#include "csaddle/field.hpp"

namespace csaddle {

/// Second-order centered discrete Laplacian. Neumann boundaries use mirror
/// ghost nodes (f_{-1} = f_1), periodic axes wrap.
Field laplacian(const Field& f);

/// (Delta + 1)^2 f, computed as two sequential (laplacian + identity) applications.
/// Periodic grids only.
Field helmholtz_sq(const Field& f);

/// Solve -Delta w = f with mean(w) = 0 by spectral diagonalization; requires
/// mean(f) = 0 to 1e-10 * ||f||_L2.
Field inv_neg_laplacian_zero_mean(const Field& f);

/// Centered first difference along an axis (the discrete translation mode
/// d_x phi on periodic grids; zero at Neumann boundaries by mirror symmetry).
Field dx_centered(const Field& f, int axis = 0);

/// h-weighted integral of f (trapezoid weights on Neumann grids).
double mass(const Field& f);

/// f minus its mean; mass(result) = 0 to rounding.
Field project_zero_mean(const Field& f);

/// L2 quadrature of f*g.
double inner_l2(const Field& f, const Field& g);

double norm_l2(const Field& f);

/// <f, -Delta f> under the quadrature weights: the summation-by-parts
/// Dirichlet energy sum_edges (df)^2 / h. This is the exact quadratic form of
/// the discrete Laplacian, so energies built from it differentiate to the
/// stencil operators without quadrature slack.
double dirichlet_form(const Field& f);

/// <f, -Delta g> (bilinear version of dirichlet_form).
double dirichlet_inner(const Field& f, const Field& g);

}  // namespace csaddle
