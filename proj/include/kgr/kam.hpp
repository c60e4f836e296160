#pragma once

#include "kgr/melnikov.hpp"
#include "kgr/opnorms.hpp"
#include "kgr/spectral.hpp"

// Quantitative KAM reduction: the homological solve of a single step, the
// iteration with the schedule
//   delta_n = 3 rho_0 / (pi^2 (1+n^2)),  rho_{n+1} = rho_n - delta_n,
//   eta_n = (M^alpha/gamma) |V^(n)|,     N_n = ceil(-ln(eta_n)/delta_n),
// the limit eigenvalues, and the composed transformation.

namespace kgr {

struct KamSchedule {
    double rho0 = 0;
    std::vector<double> deltas;
    std::vector<double> rhos;  // rhos[n] is the width eta_n is measured at
    std::vector<double> etas;
    std::vector<int> Ns;
};

struct KamStepLog {
    int n = 0;                // step index (1-based: produced V^{(n)})
    double eta = 0;           // eta_n after the step
    int N = 0;                // cutoff used by the step
    double worstMargin = 0;   // worst Melnikov margin encountered
    double homResidual = 0;   // residual of the homological equation
    double generatorNorm = 0; // |X^{(n)}| in the (alpha,alpha) norm
    double lieTail = 0;       // norm of the last retained series term
    double discarded = 0;     // convolution mass dropped in this step
    double symmetryDefect = 0;
};

struct EigenvalueLadder {
    std::vector<RVec> rows;  // lambda^{(n)} per step, row 0 = unperturbed
    RVec final;              // last row
    RVec eps;                // final - unperturbed
};

struct KamState {
    int n = 0;
    RVec lambdas;                     // current lambda^{(n)}
    BlockOperator V;                  // current perturbation
    std::vector<BlockOperator> Wacc;  // generators X^{(1)}, ..., X^{(n)}
    KamSchedule schedule;
    std::vector<KamStepLog> log;
    double eta0 = 0;
    bool smallnessOk = false;   // eta_0 e <= k0, the reported paper condition
    bool templateOk = true;     // eta_n <= eta_0 e^{1-(3/2)^n} along the run
    bool converged = false;
};

// Exact solve of the step homological equation over the modes |k|_inf <= N:
//   Xhat^d_{jl}(k) = Phat^d_{jl}(k) / (i (omega.k + lambda_j - lambda_l)),
//   Xhat^o_{jl}(k) = Phat^o_{jl}(k) / (i (omega.k + lambda_j + lambda_l)),
// the (k,j,l) = (0,a,a) slots of the d-block routed into Z instead. Every
// denominator is checked against the step threshold; a failure throws
// DenominatorTooSmall.
std::pair<BlockOperator, RVec> solve_step_homological(const BlockOperator& P, const RVec& lambdas,
                                                      const RVec& omega, int N,
                                                      const ModelConfig& cfg);

// One reduction step: solve, update eigenvalues, and rebuild the perturbation
// as (exact conjugated generator) - A^+ through the truncated Lie series.
void kam_step(KamState& state, const RVec& omega, const ModelConfig& cfg);

struct KamRunResult {
    KamState state;
    EigenvalueLadder ladder;
};

// Full iteration from the Magnus output V^{(0)}; stops at eta < etaTol or
// maxSteps. Throws NotSmallEnough when eta_0 >= 1 (schedule undefined).
KamRunResult kam_run(const BlockOperator& V0, const RVec& lambdas0, const RVec& omega,
                     const ModelConfig& cfg, int maxSteps = 12, double etaTol = 1e-12);

// W^n(theta) = e^{-i X^(1)(theta)} ... e^{-i X^(n)(theta)} by dense matrix
// exponentials, and its exact inverse (reversed product of e^{+i X}).
Mat compose_transformation(const KamState& state, const RVec& theta);
Mat compose_transformation_inverse(const KamState& state, const RVec& theta);

// Deviation of U from the sigma3-pseudo-unitarity U^H sigma3 U = sigma3 that
// the symmetry-structured generators preserve on the H^0 product.
double pseudo_unitarity_defect(const Mat& U);

}  // namespace kgr
