#pragma once

#include "kgr/opnorms.hpp"
#include "kgr/spectral.hpp"

// Normal form for the fast-oscillating driving: the generator X solves
// W - dX/dt = 0 in closed form, the transformed perturbation is
//   V^d = i[X,B] + 2XBX,   V^o = -i[X,B]_a + 2XBX,
// and the remainder vanishes identically through the sigma4 algebra.

namespace kgr {

struct MagnusDiagnostics {
    double homResidual = 0;     // worst |i(omega.k) Xhat(k) - Wcore_hat(k)|
    double discardedMass = 0;   // convolution mass dropped building 2XBX
    double symmetryDefect = 0;  // invariant check on (Vd, Vo)
    double validityWidth = 0;   // analyticity width tag rho/2 (metadata only)
};

struct MagnusResult {
    AngleOperator X;   // scalar generator; the block form is X sigma4
    AngleOperator Vd;
    AngleOperator Vo;
    RVec omega;
    MagnusDiagnostics diagnostics;

    // The transformed perturbation as a BlockOperator ((Vd, Vo), ...).
    BlockOperator V() const;
};

// Xhat(k) = Wcore_hat(k) / (i omega.k) for k != 0, Xhat(0) = 0. Throws
// DenominatorTooSmall when some |omega.k| on the support falls below the
// Omega_0 threshold gamma0 M / <k>^{tau0}.
AngleOperator solve_magnus(const AngleOperator& Wcore, const RVec& omega, const ModelConfig& cfg);

// (Vd, Vo) of the transformed Hamiltonian; commutators with B = diag(lambda)
// are evaluated entrywise through the eigenvalue differences/sums.
std::pair<AngleOperator, AngleOperator> build_new_perturbation(const AngleOperator& X,
                                                               const ModelConfig& cfg,
                                                               double* discarded = nullptr);

// Full pipeline: solve, build, verify symmetries, tag the width.
MagnusResult magnus_normal_form(const AngleOperator& Wcore, const RVec& omega,
                                const ModelConfig& cfg);

struct PauliDiagnostics {
    double ad3 = 0;           // ||ad^3_X(H0)|| / (||X||^3 ||B||)
    double ad2Defect = 0;     // ||ad^2_X(H0) - 4XBX sigma4|| / (||X||^2 ||B||)
    double sigma4Product = 0; // ||(X sigma4)(Y sigma4)|| / (||X|| ||Y||), Y = XBX
};

// Direct 2Jx2J evaluation of the exact cancellation chain at sampled theta.
PauliDiagnostics verify_pauli_cancellations(const AngleOperator& X, const ModelConfig& cfg,
                                            const std::vector<RVec>& thetaSamples);

// Evaluates the exact transformed generator at sampled theta (Lie series of
// order cfg.lieOrder, s-integral by cfg.quadS-point Gauss quadrature) and
// returns max_theta || Htilde(theta) - (H0 + V(theta)) ||_F.
double verify_magnus_conjugation(const BlockOperator& W, const MagnusResult& result,
                                 const ModelConfig& cfg, const std::vector<RVec>& thetaSamples);

// Deterministic theta sample grid over the torus.
std::vector<RVec> theta_grid(int nu, int count);

}  // namespace kgr
