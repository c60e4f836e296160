#include "kgr/magnus.hpp"

#include <cmath>

namespace kgr {

BlockOperator MagnusResult::V() const {
    BlockOperator out(Vd.dim(), Vd.nu(), Vd.kmax());
    out.d = Vd;
    out.o = Vo;
    return out;
}

AngleOperator solve_magnus(const AngleOperator& Wcore, const RVec& omega, const ModelConfig& cfg) {
    AngleOperator X(Wcore.dim(), Wcore.nu(), Wcore.kmax());
    for (const auto& [k, m] : Wcore.fourier()) {
        if (is_zero(k)) {
            if (m.cwiseAbs().maxCoeff() > 1e-14)
                throw ConfigInvalid("solve_magnus: driving has nonzero theta-average");
            continue;
        }
        double wk = dot(omega, k);
        double threshold = cfg.gamma0 * cfg.M / std::pow(jbracket(k), cfg.tau0);
        if (std::abs(wk) < threshold)
            throw DenominatorTooSmall("Magnus |omega.k| = " + std::to_string(std::abs(wk)) +
                                      " below Omega_0 threshold at k=" + k_to_string(k));
        X.add_coeff(k, m / Cplx(0.0, wk));
    }
    return X;
}

std::pair<AngleOperator, AngleOperator> build_new_perturbation(const AngleOperator& X,
                                                               const ModelConfig& cfg,
                                                               double* discarded) {
    const int J = X.dim();
    RVec lam = eigenvalues_B(cfg.mass, J);

    AngleOperator Vd(J, X.nu(), X.kmax());
    AngleOperator Vo(J, X.nu(), X.kmax());
    for (const auto& [k, m] : X.fourier()) {
        Mat comm(J, J), anti(J, J);
        for (int r = 0; r < J; ++r) {
            for (int c = 0; c < J; ++c) {
                comm(r, c) = Cplx(0, 1) * (lam[c] - lam[r]) * m(r, c);   // i[X,B]
                anti(r, c) = Cplx(0, -1) * (lam[c] + lam[r]) * m(r, c);  // -i[X,B]_a
            }
        }
        Vd.add_coeff(k, comm);
        Vo.add_coeff(k, anti);
    }

    // 2 X B X, shared by both blocks, with truncated k-convolution.
    AngleOperator XB = X.scale_cols(lam);
    AngleOperator XBX = AngleOperator::convolve(XB, X, discarded);
    XBX *= Cplx(2, 0);
    Vd += XBX;
    Vo += XBX;
    Vd.prune();
    Vo.prune();
    return {Vd, Vo};
}

MagnusResult magnus_normal_form(const AngleOperator& Wcore, const RVec& omega,
                                const ModelConfig& cfg) {
    MagnusResult res;
    res.omega = omega;
    res.X = solve_magnus(Wcore, omega, cfg);

    double resid = 0;
    for (const auto& [k, m] : res.X.fourier()) {
        double wk = dot(omega, k);
        resid = std::max(resid, (Cplx(0.0, wk) * m - Wcore.coeff(k)).cwiseAbs().maxCoeff());
    }
    res.diagnostics.homResidual = resid;

    auto [Vd, Vo] = build_new_perturbation(res.X, cfg, &res.diagnostics.discardedMass);
    res.Vd = Vd;
    res.Vo = Vo;
    res.diagnostics.symmetryDefect = res.V().symmetry_defect();
    res.diagnostics.validityWidth = cfg.rho / 2.0;
    return res;
}

std::vector<RVec> theta_grid(int nu, int count) {
    std::vector<RVec> grid;
    grid.reserve(count);
    // Irrational stride keeps multi-dimensional samples off resonant lines.
    const double golden = 0.61803398874989484820;
    for (int i = 0; i < count; ++i) {
        RVec th(nu);
        for (int d = 0; d < nu; ++d)
            th[d] = 2.0 * M_PI * std::fmod((i + 1) * golden * (d + 1) + 0.17 * (d + 1), 1.0);
        grid.push_back(th);
    }
    return grid;
}

PauliDiagnostics verify_pauli_cancellations(const AngleOperator& X, const ModelConfig& cfg,
                                            const std::vector<RVec>& thetaSamples) {
    const int J = X.dim();
    RVec lam = eigenvalues_B(cfg.mass, J);
    Mat H0 = assemble_sigma3(lam);
    Mat B = lam.asDiagonal().toDenseMatrix().cast<Cplx>();

    PauliDiagnostics diag;
    for (const RVec& th : thetaSamples) {
        Mat x = X.eval(th);
        double nx = x.norm();
        if (nx == 0.0) continue;
        Mat bX = assemble_sigma4(x);
        auto ad = [&](const Mat& A) { return Cplx(0, 1) * (bX * A - A * bX); };
        Mat ad1 = ad(H0);
        Mat ad2 = ad(ad1);
        Mat ad3 = ad(ad2);
        double nb = B.norm();

        Mat xbx = x * B * x;
        Mat expected2 = 4.0 * assemble_sigma4(xbx);
        diag.ad3 = std::max(diag.ad3, ad3.norm() / (nx * nx * nx * nb));
        diag.ad2Defect = std::max(diag.ad2Defect, (ad2 - expected2).norm() / (nx * nx * nb));
        double ny = xbx.norm();
        if (ny > 0) {
            Mat prod = bX * assemble_sigma4(xbx);
            diag.sigma4Product = std::max(diag.sigma4Product, prod.norm() / (nx * ny));
        }
    }
    return diag;
}

double verify_magnus_conjugation(const BlockOperator& W, const MagnusResult& result,
                                 const ModelConfig& cfg, const std::vector<RVec>& thetaSamples) {
    const int J = W.dim();
    RVec lam = eigenvalues_B(cfg.mass, J);
    Mat H0 = assemble_sigma3(lam);

    std::vector<double> nodes, weights;
    gauss_legendre_01(cfg.quadS, nodes, weights);
    // c_q = int_0^1 s^q ds via the quadrature actually configured.
    std::vector<double> cq(cfg.lieOrder + 1, 0.0);
    for (int q = 0; q <= cfg.lieOrder; ++q)
        for (int i = 0; i < cfg.quadS; ++i) cq[q] += weights[i] * std::pow(nodes[i], q);

    AngleOperator Xdot = result.X.time_derivative(result.omega);
    BlockOperator V = result.V();

    double worst = 0;
    for (const RVec& th : thetaSamples) {
        Mat bX = assemble_sigma4(result.X.eval(th));
        Mat H = H0 + W.assemble(th);
        Mat bXdot = assemble_sigma4(Xdot.eval(th));

        auto ad = [&](const Mat& A) { return Cplx(0, 1) * (bX * A - A * bX); };

        // e^{iX} H e^{-iX} - int_0^1 e^{isX} Xdot e^{-isX} ds, Lie series form.
        Mat conj = H;
        Mat termH = H;
        Mat integral = bXdot;  // q = 0 term, c_0 = 1
        Mat termD = bXdot;
        double fact = 1;
        integral *= cq[0];
        for (int q = 1; q <= cfg.lieOrder; ++q) {
            termH = ad(termH);
            termD = ad(termD);
            fact *= q;
            conj += termH / fact;
            integral += (cq[q] / fact) * termD;
        }
        Mat Htilde = conj - integral;
        Mat target = H0 + V.assemble(th);
        worst = std::max(worst, (Htilde - target).norm());
    }
    return worst;
}

}  // namespace kgr
