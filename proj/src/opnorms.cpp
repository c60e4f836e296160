#include "kgr/opnorms.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <set>

namespace kgr {

double sdecay_norm(const Mat& A, double s) {
    const long J = A.rows();
    double total = 0;
    for (long h = 0; h < J; ++h) {
        double sup = 0;
        for (long c = 0; c + h < J; ++c) {
            sup = std::max(sup, std::abs(A(c + h, c)));
            sup = std::max(sup, std::abs(A(c, c + h)));
        }
        if (sup > 0) total += std::pow(1.0 + double(h) * h, s) * sup * sup;
    }
    return std::sqrt(total);
}

double analytic_norm(const AngleOperator& A, double rho, double s) {
    double total = 0;
    for (const auto& [k, m] : A.fourier())
        total += std::exp(rho * norm_l1(k)) * sdecay_norm(m, s);
    return total;
}

namespace {

RVec bracket_weights(int J, double sigma) {
    RVec w(J);
    for (int j = 1; j <= J; ++j) w[j - 1] = std::pow(1.0 + double(j) * j, sigma / 2.0);
    return w;
}

}  // namespace

double block_norm(const BlockOperator& A, const NormParams& p) {
    const int J = A.dim();
    // (left exponent, right exponent, block): repeated combinations counted once.
    std::set<std::tuple<double, double, int>> terms;
    terms.insert({p.alphaW, 0.0, 0});
    terms.insert({0.0, p.alphaW, 0});
    terms.insert({p.betaW, 0.0, 1});
    terms.insert({0.0, p.betaW, 1});
    for (double sigma : {p.alphaW, -p.alphaW, p.betaW, -p.betaW, 0.0})
        for (int delta : {0, 1}) terms.insert({sigma, -sigma, delta});

    double total = 0;
    for (const auto& [le, re, delta] : terms) {
        const AngleOperator& blk = (delta == 0) ? A.d : A.o;
        if (blk.empty()) continue;
        AngleOperator weighted = blk;
        if (le != 0.0) weighted = weighted.scale_rows(bracket_weights(J, le));
        if (re != 0.0) weighted = weighted.scale_cols(bracket_weights(J, re));
        total += analytic_norm(weighted, p.rho, p.s);
    }
    return total;
}

double lipschitz_block_norm(const std::vector<std::pair<RVec, BlockOperator>>& family,
                            const NormParams& p) {
    if (family.empty()) throw std::invalid_argument("lipschitz_block_norm: empty family");
    double sup = 0;
    for (const auto& [w, A] : family) sup = std::max(sup, block_norm(A, p));
    if (p.lipWeight == 0.0) return sup;
    if (family.size() < 2)
        throw std::invalid_argument("lipschitz_block_norm: need >= 2 samples for the Lipschitz part");
    double lip = 0;
    for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = i + 1; j < family.size(); ++j) {
            double dist = (family[i].first - family[j].first).norm();
            if (dist == 0.0) continue;
            BlockOperator diff = family[i].second;
            diff -= family[j].second;
            lip = std::max(lip, block_norm(diff, p) / dist);
        }
    }
    return sup + p.lipWeight * lip;
}

BlockOperator commutator_ad(const BlockOperator& X, const BlockOperator& V, double* discarded) {
    AngleOperator Vdc = V.d.conjugated();
    AngleOperator Voc = V.o.conjugated();
    AngleOperator Xdc = X.d.conjugated();
    AngleOperator Xoc = X.o.conjugated();

    AngleOperator Zd = AngleOperator::convolve(X.d, V.d, discarded);
    Zd -= AngleOperator::convolve(X.o, Voc, discarded);
    Zd -= AngleOperator::convolve(V.d, X.d, discarded);
    Zd += AngleOperator::convolve(V.o, Xoc, discarded);

    AngleOperator Zo = AngleOperator::convolve(X.d, V.o, discarded);
    Zo -= AngleOperator::convolve(X.o, Vdc, discarded);
    Zo -= AngleOperator::convolve(V.d, X.o, discarded);
    Zo += AngleOperator::convolve(V.o, Xdc, discarded);

    BlockOperator out(V.dim(), V.d.nu(), V.d.kmax());
    out.d = Cplx(0, 1) * Zd;
    out.o = Cplx(0, 1) * Zo;
    out.d.prune();
    out.o.prune();
    return out;
}

LieResult lie_conjugate(const BlockOperator& X, const BlockOperator& V, int order) {
    LieResult r;
    r.value = V;
    BlockOperator term = V;
    double factorial = 1;
    for (int q = 1; q <= order; ++q) {
        term = commutator_ad(X, term, &r.discarded);
        factorial *= q;
        BlockOperator scaled = term;
        scaled *= Cplx(1.0 / factorial, 0.0);
        r.value += scaled;
        r.lastTermNorm = scaled.max_abs();
    }
    return r;
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1 - x * x) * dp * dp);
    }
}

double hr_operator_norm(const Mat& A, double r) {
    const int J = int(A.rows());
    RVec w = bracket_weights(J, r);
    RVec winv = bracket_weights(J, -r);
    Mat scaled = w.asDiagonal() * A * winv.asDiagonal();
    Eigen::JacobiSVD<Mat> svd(scaled);
    return svd.singularValues()[0];
}

}  // namespace kgr
