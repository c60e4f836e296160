#include "kgr/kam.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

namespace kgr {

namespace {

BlockOperator diagonal_block(const RVec& lambdas, int nu, int kmax) {
    const int J = int(lambdas.size());
    BlockOperator A(J, nu, kmax);
    A.d.add_coeff(KIndex(nu, 0), lambdas.cast<Cplx>().asDiagonal().toDenseMatrix());
    return A;
}

// H^+ = sum_q ad_X^q(H)/q! - sum_q c_q ad_X^q(Xdot)/q!  with
// c_q = int_0^1 s^q ds evaluated by the configured Gauss quadrature.
BlockOperator conjugate_generator(const BlockOperator& X, const BlockOperator& H,
                                  const BlockOperator& Xdot, const ModelConfig& cfg,
                                  double* lieTail, double* discarded) {
    std::vector<double> nodes, weights;
    gauss_legendre_01(cfg.quadS, nodes, weights);
    std::vector<double> cq(cfg.lieOrder + 1, 0.0);
    for (int q = 0; q <= cfg.lieOrder; ++q)
        for (int i = 0; i < cfg.quadS; ++i) cq[q] += weights[i] * std::pow(nodes[i], q);

    BlockOperator acc = H;
    BlockOperator termH = H;
    BlockOperator termD = Xdot;
    BlockOperator sub = Xdot;
    sub *= Cplx(cq[0], 0);
    acc -= sub;

    double fact = 1;
    double tail = 0;
    for (int q = 1; q <= cfg.lieOrder; ++q) {
        termH = commutator_ad(X, termH, discarded);
        termD = commutator_ad(X, termD, discarded);
        fact *= q;
        BlockOperator a = termH;
        a *= Cplx(1.0 / fact, 0);
        BlockOperator b = termD;
        b *= Cplx(cq[q] / fact, 0);
        acc += a;
        acc -= b;
        tail = std::max(a.max_abs(), b.max_abs());
    }
    if (lieTail) *lieTail = tail;
    return acc;
}

double eta_of(const BlockOperator& V, double rho, const ModelConfig& cfg) {
    NormParams p;
    p.s = cfg.s0;
    p.rho = rho;
    p.alphaW = cfg.alpha;
    p.betaW = 0.0;
    return std::pow(cfg.M, cfg.alpha) / cfg.gammaKam * block_norm(V, p);
}

}  // namespace

std::pair<BlockOperator, RVec> solve_step_homological(const BlockOperator& P, const RVec& lambdas,
                                                      const RVec& omega, int N,
                                                      const ModelConfig& cfg) {
    const int J = P.dim();
    const double Ma = std::pow(cfg.M, cfg.alpha);
    const double base = cfg.gammaKam / (2.0 * std::pow(jbracket(double(N)), cfg.tauKam));

    BlockOperator X(J, P.d.nu(), P.d.kmax());
    RVec Z = RVec::Zero(J);

    for (const auto& [k, m] : P.d.fourier()) {
        if (norm_inf(k) > N) continue;
        const double wk = dot(omega, k);
        const bool kzero = is_zero(k);
        Mat x = Mat::Zero(J, J);
        for (int r = 0; r < J; ++r) {
            for (int c = 0; c < J; ++c) {
                if (kzero && r == c) {
                    // (0,a,a) slot: routed to the normal form correction.
                    if (std::abs(m(r, c).imag()) > 1e-12 * (1.0 + std::abs(m(r, c))))
                        throw std::runtime_error("solve_step: diagonal P^d(0) not real");
                    Z[r] += m(r, c).real();
                    continue;
                }
                double deno = wk + lambdas[r] - lambdas[c];
                double thr = base * std::pow(jbracket(double(r - c)), cfg.alpha) / Ma;
                if (std::abs(deno) < thr)
                    throw DenominatorTooSmall("KAM d-block at k=" + k_to_string(k) +
                                              " j=" + std::to_string(r + 1) +
                                              " l=" + std::to_string(c + 1));
                x(r, c) = m(r, c) / Cplx(0.0, deno);
            }
        }
        X.d.add_coeff(k, x);
    }

    for (const auto& [k, m] : P.o.fourier()) {
        if (norm_inf(k) > N) continue;
        const double wk = dot(omega, k);
        Mat x = Mat::Zero(J, J);
        for (int r = 0; r < J; ++r) {
            for (int c = 0; c < J; ++c) {
                double deno = wk + lambdas[r] + lambdas[c];
                double thr = base * std::pow(jbracket(double(r + c + 2)), cfg.alpha) / Ma;
                if (std::abs(deno) < thr)
                    throw DenominatorTooSmall("KAM o-block at k=" + k_to_string(k) +
                                              " j=" + std::to_string(r + 1) +
                                              " l=" + std::to_string(c + 1));
                x(r, c) = m(r, c) / Cplx(0.0, deno);
            }
        }
        X.o.add_coeff(k, x);
    }
    X.d.prune();
    X.o.prune();
    return {X, Z};
}

void kam_step(KamState& state, const RVec& omega, const ModelConfig& cfg) {
    const int n = state.n;
    const double etaPrev = state.schedule.etas[n];
    const double rho = state.schedule.rhos[n];

    KamStepLog log;
    log.n = n + 1;

    if (etaPrev == 0.0) {
        // Nothing left to remove.
        state.n += 1;
        state.schedule.deltas.push_back(0);
        state.schedule.rhos.push_back(rho);
        state.schedule.etas.push_back(0);
        state.schedule.Ns.push_back(1);
        state.log.push_back(log);
        return;
    }
    if (etaPrev >= 1.0)
        throw NotSmallEnough("kam_step: eta = " + std::to_string(etaPrev) + " >= 1");

    const double delta = 3.0 / (M_PI * M_PI * (1.0 + double(n) * n)) * state.schedule.rho0;
    const int N = std::max(1, int(std::ceil(-std::log(etaPrev) / delta)));
    const double rhoNext = rho - delta;

    MelnikovVerdict verdict = in_step_set(omega, state.lambdas, N, cfg);
    log.worstMargin = verdict.worstTriple.margin;
    if (!verdict.member)
        throw DenominatorTooSmall("kam_step: omega excluded by the step Melnikov set at n=" +
                                  std::to_string(n) + ", k=" + k_to_string(verdict.worstTriple.k));

    auto [X, Z] = solve_step_homological(state.V, state.lambdas, omega, N, cfg);

    // Residual of the homological equation, by construction at roundoff.
    {
        double resid = 0;
        const int J = state.V.dim();
        for (const auto& [k, m] : state.V.d.low_pass(N).fourier()) {
            double wk = dot(omega, k);
            Mat xd = X.d.coeff(k);
            for (int r = 0; r < J; ++r)
                for (int c = 0; c < J; ++c) {
                    Cplx lhs = Cplx(0, 1) * (state.lambdas[c] - state.lambdas[r]) * xd(r, c) -
                               Cplx(0, wk) * xd(r, c) + m(r, c);
                    if (is_zero(k) && r == c) lhs -= Z[r];
                    resid = std::max(resid, std::abs(lhs));
                }
        }
        for (const auto& [k, m] : state.V.o.low_pass(N).fourier()) {
            double wk = dot(omega, k);
            Mat xo = X.o.coeff(k);
            for (int r = 0; r < J; ++r)
                for (int c = 0; c < J; ++c) {
                    Cplx lhs = Cplx(0, -1) * (state.lambdas[c] + state.lambdas[r]) * xo(r, c) -
                               Cplx(0, wk) * xo(r, c) + m(r, c);
                    resid = std::max(resid, std::abs(lhs));
                }
        }
        log.homResidual = resid;
    }

    {
        NormParams pa;
        pa.s = cfg.s0;
        pa.rho = rho;
        pa.alphaW = cfg.alpha;
        pa.betaW = cfg.alpha;
        log.generatorNorm = block_norm(X, pa);
    }

    RVec lambdasNext = state.lambdas + Z;

    BlockOperator A = diagonal_block(state.lambdas, cfg.nu, state.V.d.kmax());
    BlockOperator H = A;
    H += state.V;
    BlockOperator Xdot(state.V.dim(), cfg.nu, state.V.d.kmax());
    Xdot.d = X.d.time_derivative(omega);
    Xdot.o = X.o.time_derivative(omega);

    BlockOperator Hplus = conjugate_generator(X, H, Xdot, cfg, &log.lieTail, &log.discarded);
    BlockOperator Aplus = diagonal_block(lambdasNext, cfg.nu, state.V.d.kmax());
    Hplus -= Aplus;
    Hplus.d.prune(0.0);
    Hplus.o.prune(0.0);

    double etaNext = eta_of(Hplus, rhoNext, cfg);
    if (etaNext >= etaPrev)
        throw ConvergenceStall("kam_step: eta grew from " + std::to_string(etaPrev) + " to " +
                               std::to_string(etaNext));

    log.eta = etaNext;
    log.N = N;
    log.symmetryDefect = std::max(X.symmetry_defect(), Hplus.symmetry_defect());

    state.n += 1;
    state.lambdas = lambdasNext;
    state.V = Hplus;
    state.Wacc.push_back(X);
    state.schedule.deltas.push_back(delta);
    state.schedule.rhos.push_back(rhoNext);
    state.schedule.etas.push_back(etaNext);
    state.schedule.Ns.push_back(N);
    state.log.push_back(log);
}

KamRunResult kam_run(const BlockOperator& V0, const RVec& lambdas0, const RVec& omega,
                     const ModelConfig& cfg, int maxSteps, double etaTol) {
    KamRunResult out;
    KamState& st = out.state;
    st.lambdas = lambdas0;
    st.V = V0;
    st.schedule.rho0 = cfg.rho / 4.0;
    st.schedule.rhos.push_back(st.schedule.rho0);

    double eta0 = eta_of(V0, st.schedule.rho0, cfg);
    st.eta0 = eta0;
    st.schedule.etas.push_back(eta0);
    st.smallnessOk = eta0 * M_E <= cfg.k0;
    if (eta0 >= 1.0)
        throw NotSmallEnough("kam_run: eta_0 = " + std::to_string(eta0) +
                             " >= 1; increase M or shrink the driving");

    out.ladder.rows.push_back(lambdas0);
    while (st.n < maxSteps && st.schedule.etas.back() >= etaTol) {
        kam_step(st, omega, cfg);
        out.ladder.rows.push_back(st.lambdas);
        double bound = eta0 * std::exp(1.0 - std::pow(1.5, st.n));
        if (st.schedule.etas.back() > bound) st.templateOk = false;
    }
    st.converged = st.schedule.etas.back() < etaTol;
    out.ladder.final = st.lambdas;
    out.ladder.eps = st.lambdas - lambdas0;
    return out;
}

Mat compose_transformation(const KamState& state, const RVec& theta) {
    const int J = state.V.dim();
    Mat W = Mat::Identity(2 * J, 2 * J);
    for (const BlockOperator& X : state.Wacc) {
        Mat gen = Cplx(0, -1) * X.assemble(theta);
        W = W * gen.exp();
    }
    return W;
}

Mat compose_transformation_inverse(const KamState& state, const RVec& theta) {
    const int J = state.V.dim();
    Mat W = Mat::Identity(2 * J, 2 * J);
    for (auto it = state.Wacc.rbegin(); it != state.Wacc.rend(); ++it) {
        Mat gen = Cplx(0, 1) * it->assemble(theta);
        W = W * gen.exp();
    }
    return W;
}

double pseudo_unitarity_defect(const Mat& U) {
    const long J = U.rows() / 2;
    RVec ones = RVec::Ones(J);
    Mat s3 = assemble_sigma3(ones);
    return (U.adjoint() * s3 * U - s3).cwiseAbs().maxCoeff();
}

}  // namespace kgr
