#pragma once

#include "kgr/kam.hpp"
#include "kgr/magnus.hpp"

// Direct time integration of the truncated driven system
//   i dphi/dt = (H0 + W(omega t)) phi,  phi = (phi, conj phi) in C^{2J},
// and the cross-checks of the Floquet decomposition and the Sobolev bands.

namespace kgr {

struct DrivenSystem {
    RVec lambdas;     // diagonal of B
    BlockOperator W;  // driving blocks; the original system has W.d = W.o
    RVec omega;
};

struct EvolutionRun {
    CVec phi0;           // 2J initial state (phi, conj phi)
    double T = 10.0;
    double dt = 1e-3;
    double r = 0.0;      // Sobolev index traced along the flow
    int sampleStride = 0;  // 0: choose automatically (~1024 samples)
};

struct TrajectorySample {
    double t;
    CVec phi;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<std::pair<double, double>> normTrace;  // (t, |phi(t)|_{H^r x H^r})
};

enum class Integrator { RungeKutta4, ExponentialMidpoint };

// Fourth-order explicit stepping with the stiffness guard
// dt * max(|omega|, lambda_J) <= 0.1; throws StepTooLarge otherwise.
// The exponential-midpoint variant is the symmetric back-to-back oracle and
// accepts any dt.
Trajectory integrate(const DrivenSystem& sys, const EvolutionRun& run,
                     Integrator method = Integrator::RungeKutta4);

// Integrates to T and back; returns |phi_back - phi0| / |phi0| in H^0.
double time_reversal_error(const DrivenSystem& sys, const EvolutionRun& run);

struct FloquetReport {
    double maxRelError = 0;
    double firstHalfMax = 0;
    double secondHalfMax = 0;
    std::vector<std::pair<double, double>> errors;  // (t, relative error)
};

// Reconstructs the state through T(omega t)^{-1}-style factors
//   phi_rec(t) = e^{-i bX(theta_t)} W^n(theta_t) e^{-i t H_inf} chi_0,
// theta_t = omega t reduced mod 2pi componentwise, and compares against the
// integrated trajectory in the H^0 x H^0 norm relative to |phi_0|.
FloquetReport floquet_compare(const Trajectory& traj, const MagnusResult& magnus,
                              const KamState& kam, const RVec& lambdaInf, const RVec& omega);

struct NormBandRow {
    double r;
    double minRatio;
    double maxRatio;
    double ratio;  // maxRatio / minRatio
};

// Per Sobolev index: extremes of |phi(t)|_{H^r} / |phi_0|_{H^r} along the
// trajectory.
std::vector<NormBandRow> norm_bound_report(const Trajectory& traj, const std::vector<double>& rs);

}  // namespace kgr
