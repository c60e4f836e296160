#pragma once

#include "kgr/angle_op.hpp"

// The norm hierarchy on truncated matrices: s-decay norms, rho-analytic
// norms, weighted block norms with the (alpha,beta) smoothing bookkeeping,
// and their Lipschitz-in-omega variants, plus the commutator / Lie-series
// machinery built on them.

namespace kgr {

// |A|_s = ( sum_h <h>^{2s} (sup_{|m-n|=h} |A_m^n|)^2 )^{1/2}.
double sdecay_norm(const Mat& A, double s);

// |A|_{rho,s} = sum_k e^{rho |k|_1} |Ahat(k)|_s.
double analytic_norm(const AngleOperator& A, double rho, double s);

// Weighted block norm |bA|^{alpha,beta}_{rho,s}: the four one-sided weight
// terms plus the conjugations <D>^sigma A^delta <D>^{-sigma} for
// sigma in {+-alpha, +-beta, 0}, repeated terms counted once.
double block_norm(const BlockOperator& A, const NormParams& p);

// Finite-sample Lipschitz norm sup |A| + w max |A(w1)-A(w2)|/|w1-w2|; a
// lower bound for the continuum supremum, reported as such.
double lipschitz_block_norm(const std::vector<std::pair<RVec, BlockOperator>>& family,
                            const NormParams& p);

// ad_X(V) = i[X, V] computed blockwise,
//   Z^d = X^d V^d - X^o conj(V^o) - V^d X^d + V^o conj(X^o)
//   Z^o = X^d V^o - X^o conj(V^d) - V^d X^o + V^o conj(X^d),
// with the k-convolution truncated to the common cutoff.
BlockOperator commutator_ad(const BlockOperator& X, const BlockOperator& V,
                            double* discarded = nullptr);

struct LieResult {
    BlockOperator value;
    double lastTermNorm = 0;  // block max_abs of the last retained term
    double discarded = 0;     // convolution mass dropped along the series
};

// sum_{q<=order} ad_X^q(V)/q!, the Lie-series image of e^{iX} V e^{-iX}.
LieResult lie_conjugate(const BlockOperator& X, const BlockOperator& V, int order);

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Operator norm of A as a map H^r -> H^r on the truncation,
// i.e. the spectral norm of <D>^r A <D>^{-r}.
double hr_operator_norm(const Mat& A, double r);

}  // namespace kgr
