#pragma once

#include "kgr/angle_op.hpp"

// Assembly of the truncated driven Klein-Gordon system on the sine basis
// sin(jx), j = 1..J, treated as an orthonormal family: every L^2 pairing on
// [0,pi] carries the explicit factor 2/pi so that matrix coefficients are
// A_m^n = <A e_m, e_n>.

namespace kgr {

// lambda_j = sqrt(j^2 + mass^2), j = 1..J.
RVec eigenvalues_B(double mass, int J);

// c_j(m) = j (lambda_j - j), the dispersive correction; 0 <= c_j <= m^2.
double dispersion_correction(double mass, int j);

// Matrix of multiplication by V(theta,x) on the sine basis via the exact
// product-to-sum rule cos(px) sin(mx) = [sin((m+p)x) + sin((m-p)x)] / 2.
// Rows pushed above J are dropped; the largest dropped entry is reported
// through *maxDropped when given.
AngleOperator assemble_V(const PotentialSpec& spec, const ModelConfig& cfg,
                         double* maxDropped = nullptr);

// W(theta) = 1/2 B^{-1/2} V(theta) B^{-1/2} sigma4; both blocks equal the
// scalar core, which solve_magnus consumes as W.d.
BlockOperator assemble_W(const AngleOperator& V, const ModelConfig& cfg);

// H^r norm (sum_m <m>^{2r} |phi_m|^2)^{1/2}.
double sobolev_norm(const SineVector& phi, double r);
double sobolev_norm(const CVec& coeffs, double r);

// H^r x H^r norm of a 2J vector (phi, psi).
double sobolev_norm2(const CVec& pair, double r);

}  // namespace kgr
