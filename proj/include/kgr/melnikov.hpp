#pragma once

#include <functional>

#include "kgr/types.hpp"

// Membership tests for the frequency sets: the Diophantine set Omega_0, the
// balanced set U_alpha on the unperturbed eigenvalues, the per-step KAM sets,
// and the final set on the limit eigenvalues; plus Monte-Carlo estimation of
// excluded relative measure on the annulus R_M.
//
// Finite ranges (|k|_inf <= K or N, 1 <= j,l <= J) define membership here.
// The infinite ranges of the underlying conditions are represented by
// auto-pass regions lifted from the measure proofs; each filter is enabled
// only when its enabling inequality holds for the given configuration, so a
// filtered test can only skip constraints it has proved satisfied.

namespace kgr {

struct MelnikovConstraint {
    KIndex k;
    int j = 0;        // 1-based spatial indices; 0 when no constraint was tested
    int l = 0;
    int sign = 0;     // +1 / -1 branch; 0 for first-order (Omega_0) constraints
    double margin = 0;
};

struct MelnikovVerdict {
    bool member = true;
    MelnikovConstraint worstTriple;  // minimizing tested constraint
    long tested = 0;
    long autoPassed = 0;
};

// |omega.k| >= gamma0 M / <k>^{tau0} over 0 < |k|_inf <= K.
MelnikovVerdict in_omega0(const RVec& omega, const ModelConfig& cfg);

// |omega.k + lambda_j +- lambda_l| >= gammaTilde/<k>^{tauTilde} <j+-l>^alpha / M^alpha
// over |k|_inf <= K, 1 <= j,l <= J, excluding (0,a,a) on the minus branch.
// `lambdas` must be the unperturbed sqrt(j^2+m^2) family (the analytic
// filters rely on 0 <= c_j <= m^2).
MelnikovVerdict in_U_alpha(const RVec& omega, const RVec& lambdas, const ModelConfig& cfg);

// Same constraint set with every triple tested directly.
MelnikovVerdict in_U_alpha_brute(const RVec& omega, const RVec& lambdas, const ModelConfig& cfg);

// Step set: |omega.k + lambda_j +- lambda_l| >= gamma/(2 <N>^tau) <j+-l>^alpha / M^alpha
// over |k|_inf <= N (optionally capped), on the current KAM eigenvalues.
MelnikovVerdict in_step_set(const RVec& omega, const RVec& lambdas, int N, const ModelConfig& cfg,
                            int kcap = -1);

// Final set: thresholds gamma/<k>^tau <j+-l>^alpha / M^alpha over |k|_inf <= K
// on the limit eigenvalues.
MelnikovVerdict in_omega_inf(const RVec& omega, const RVec& lambdasInf, const ModelConfig& cfg);

// Uniform draws from the annulus M <= |omega|_2 <= 2M by rejection from the
// bounding box; fully determined by the seed.
struct FrequencySampler {
    int nu = 1;
    double M = 100.0;
    std::uint64_t seed = 1;
    int count = 1000;

    std::vector<RVec> sample() const;
};

struct MeasureEstimate {
    double fraction = 0;  // fraction of samples failing the predicate
    double ciLow = 0;     // Wilson 95% interval
    double ciHigh = 0;
    int n = 0;
};

MeasureEstimate estimate_measure(const std::function<bool(const RVec&)>& member,
                                 const FrequencySampler& sampler);

}  // namespace kgr
