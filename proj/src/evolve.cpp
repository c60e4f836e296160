#include "kgr/evolve.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "kgr/spectral.hpp"

namespace kgr {

namespace {

RVec mod_2pi(const RVec& theta) {
    RVec out = theta;
    for (long i = 0; i < out.size(); ++i) {
        out[i] = std::fmod(out[i], 2.0 * M_PI);
        if (out[i] < 0) out[i] += 2.0 * M_PI;
    }
    return out;
}

struct Rhs {
    const DrivenSystem& sys;
    int J;

    // dphi/dt = -i H(omega t) phi, blockwise to avoid the 2J matrix build.
    void operator()(double t, const CVec& phi, CVec& out, Mat& bufD, Mat& bufO) const {
        RVec theta = mod_2pi(sys.omega * t);
        bufD = sys.W.d.eval(theta);
        bufO = sys.W.o.eval(theta);
        auto u = phi.head(J);
        auto v = phi.tail(J);
        out.head(J) = Cplx(0, -1) *
                      (sys.lambdas.cast<Cplx>().cwiseProduct(u) + bufD * u + bufO * v);
        out.tail(J) = Cplx(0, -1) * (-sys.lambdas.cast<Cplx>().cwiseProduct(v) -
                                     bufO.conjugate() * u - bufD.conjugate() * v);
    }
};

Mat hamiltonian_at(const DrivenSystem& sys, double t) {
    RVec theta = mod_2pi(sys.omega * t);
    return assemble_sigma3(sys.lambdas) + sys.W.assemble(theta);
}

}  // namespace

Trajectory integrate(const DrivenSystem& sys, const EvolutionRun& run, Integrator method) {
    const int J = int(sys.lambdas.size());
    if (run.phi0.size() != 2 * J) throw std::invalid_argument("integrate: phi0 has wrong size");

    const double stiff = std::max(sys.omega.norm(), sys.lambdas[J - 1]);
    if (method == Integrator::RungeKutta4 && run.dt * stiff > 0.1 * (1 + 1e-12))
        throw StepTooLarge("integrate: dt * max(|omega|, lambda_J) = " +
                           std::to_string(run.dt * stiff) + " exceeds 0.1");

    long nSteps = std::lround(std::ceil(run.T / run.dt - 1e-12));
    if (nSteps < 1) nSteps = 1;
    const double dt = run.T / double(nSteps);
    long stride = run.sampleStride > 0 ? run.sampleStride : std::max(1L, nSteps / 1024);

    Trajectory traj;
    CVec phi = run.phi0;
    auto record = [&](double t) {
        traj.samples.push_back({t, phi});
        traj.normTrace.emplace_back(t, sobolev_norm2(phi, run.r));
    };
    record(0.0);

    if (method == Integrator::RungeKutta4) {
        Rhs rhs{sys, J};
        CVec k1(2 * J), k2(2 * J), k3(2 * J), k4(2 * J), tmp(2 * J);
        Mat bufD(J, J), bufO(J, J);
        for (long s = 0; s < nSteps; ++s) {
            double t = s * dt;
            rhs(t, phi, k1, bufD, bufO);
            tmp = phi + 0.5 * dt * k1;
            rhs(t + 0.5 * dt, tmp, k2, bufD, bufO);
            tmp = phi + 0.5 * dt * k2;
            rhs(t + 0.5 * dt, tmp, k3, bufD, bufO);
            tmp = phi + dt * k3;
            rhs(t + dt, tmp, k4, bufD, bufO);
            phi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if ((s + 1) % stride == 0 || s + 1 == nSteps) record((s + 1) * dt);
        }
    } else {
        for (long s = 0; s < nSteps; ++s) {
            double t = s * dt;
            Mat H = hamiltonian_at(sys, t + 0.5 * dt);
            Mat U = (Cplx(0, -1) * dt * H).exp();
            phi = U * phi;
            if ((s + 1) % stride == 0 || s + 1 == nSteps) record((s + 1) * dt);
        }
    }
    return traj;
}

double time_reversal_error(const DrivenSystem& sys, const EvolutionRun& run) {
    const int J = int(sys.lambdas.size());
    long nSteps = std::lround(std::ceil(run.T / run.dt - 1e-12));
    if (nSteps < 1) nSteps = 1;
    const double dt = run.T / double(nSteps);
    CVec phi = run.phi0;
    for (long s = 0; s < nSteps; ++s) {
        Mat H = hamiltonian_at(sys, s * dt + 0.5 * dt);
        phi = ((Cplx(0, -1) * dt * H).exp() * phi).eval();
    }
    for (long s = nSteps - 1; s >= 0; --s) {
        Mat H = hamiltonian_at(sys, s * dt + 0.5 * dt);
        phi = ((Cplx(0, +1) * dt * H).exp() * phi).eval();
    }
    (void)J;
    return (phi - run.phi0).norm() / run.phi0.norm();
}

FloquetReport floquet_compare(const Trajectory& traj, const MagnusResult& magnus,
                              const KamState& kam, const RVec& lambdaInf, const RVec& omega) {
    const int J = int(lambdaInf.size());
    FloquetReport rep;
    if (traj.samples.empty()) return rep;
    const CVec& phi0 = traj.samples.front().phi;
    const double scale = sobolev_norm2(phi0, 0.0);
    const double T = traj.samples.back().t;

    RVec theta0 = RVec::Zero(omega.size());
    Mat magFactor0 = (Cplx(0, 1) * assemble_sigma4(magnus.X.eval(theta0))).exp();
    CVec chi0 = compose_transformation_inverse(kam, theta0) * (magFactor0 * phi0);

    for (const auto& s : traj.samples) {
        RVec theta = s.t * omega;
        for (long i = 0; i < theta.size(); ++i) {
            theta[i] = std::fmod(theta[i], 2.0 * M_PI);
            if (theta[i] < 0) theta[i] += 2.0 * M_PI;
        }
        CVec chi(2 * J);
        for (int j = 0; j < J; ++j) {
            Cplx ph = std::exp(Cplx(0, -lambdaInf[j] * s.t));
            chi[j] = ph * chi0[j];
            chi[J + j] = std::conj(ph) * chi0[J + j];
        }
        Mat magFactor = (Cplx(0, -1) * assemble_sigma4(magnus.X.eval(theta))).exp();
        CVec rec = magFactor * (compose_transformation(kam, theta) * chi);
        double err = sobolev_norm2(CVec(rec - s.phi), 0.0) / scale;
        rep.errors.emplace_back(s.t, err);
        rep.maxRelError = std::max(rep.maxRelError, err);
        if (s.t <= 0.5 * T)
            rep.firstHalfMax = std::max(rep.firstHalfMax, err);
        else
            rep.secondHalfMax = std::max(rep.secondHalfMax, err);
    }
    return rep;
}

std::vector<NormBandRow> norm_bound_report(const Trajectory& traj, const std::vector<double>& rs) {
    std::vector<NormBandRow> rows;
    for (double r : rs) {
        double base = sobolev_norm2(traj.samples.front().phi, r);
        double lo = 1e300, hi = 0;
        for (const auto& s : traj.samples) {
            double ratio = sobolev_norm2(s.phi, r) / base;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        rows.push_back({r, lo, hi, hi / lo});
    }
    return rows;
}

}  // namespace kgr
