#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "fockcat/errors.hpp"
#include "fockcat/rng.hpp"
#include "fockcat/spin_dynamics.hpp"

namespace fockcat
{
namespace
{
// RK4 step size target: rate * dt per step
// adaptive Dormand-Prince tolerances on the density-matrix elements
constexpr double kAbsTolerance = 1e-11;
constexpr double kRelTolerance = 1e-10;

int motional_dim(Eigen::Index total, Space space)
{
    auto n = space == Space::spin_motion ? total / 2 : total;
    if (n <= 0 || (space == Space::spin_motion && total % 2 != 0))
        throw ValidationError("open system: dimension does not match space");
    return static_cast<int>(n);
}

OperatorMatrix lift(OperatorMatrix const& motion, Space space)
{
    if (space == Space::motion)
        return motion;
    auto n = motion.rows();
    OperatorMatrix out = OperatorMatrix::Zero(2 * n, 2 * n);
    out.topLeftCorner(n, n) = motion;
    out.bottomRightCorner(n, n) = motion;
    return out;
}

// Upper bound on the total jump rate per unit state norm.
double rate_bound(std::vector<OperatorMatrix> const& jumps)
{
    double total = 0.0;
    for (auto const& l : jumps)
    {
        OperatorMatrix ll = l.adjoint() * l;
        total += ll.cwiseAbs().rowwise().sum().maxCoeff();
    }
    return total;
}

}  // namespace

void DecoherenceSpec::validate() const
{
    for (double x : {heating_rate, motional_dephasing_rate, spin_dephasing_rate})
    {
        if (!(std::isfinite(x) && x >= 0.0))
            throw ValidationError("DecoherenceSpec: rates must be finite and >= 0");
    }
}

std::vector<OperatorMatrix>
jump_operators(DecoherenceSpec const& spec, int n_max, Space space)
{
    spec.validate();
    std::vector<OperatorMatrix> jumps;
    if (spec.heating_rate > 0.0)
    {
        OperatorMatrix a = annihilation_operator(n_max);
        double g = std::sqrt(spec.heating_rate);
        jumps.push_back(lift(g * a, space));
        jumps.push_back(lift(g * OperatorMatrix(a.adjoint()), space));
    }
    if (spec.motional_dephasing_rate > 0.0)
    {
        double g = std::sqrt(2.0 * spec.motional_dephasing_rate);
        jumps.push_back(lift(g * number_operator(n_max), space));
    }
    if (spec.spin_dephasing_rate > 0.0)
    {
        if (space != Space::spin_motion)
            throw ValidationError(
                "jump_operators: spin dephasing requires a spin space");
        double g = std::sqrt(0.5 * spec.spin_dephasing_rate);
        OperatorMatrix sz = OperatorMatrix::Identity(2 * n_max, 2 * n_max);
        sz.topLeftCorner(n_max, n_max) *= -1.0;  // sigma_z |down> = -|down>
        jumps.push_back(g * sz);
    }
    return jumps;
}

//---------------------------------------------------------------------------//
// Master equation
//---------------------------------------------------------------------------//

DensityMatrix evolve_master_equation(DensityMatrix const& rho,
                                     OperatorMatrix const& h,
                                     DecoherenceSpec const& spec,
                                     double t,
                                     Space space)
{
    spec.validate();
    if (!(std::isfinite(t) && t >= 0.0))
        throw ValidationError("evolve_master_equation: time must be >= 0");
    auto const dim = rho.rows();
    if (rho.cols() != dim || h.rows() != dim || h.cols() != dim)
        throw ValidationError("evolve_master_equation: dimension mismatch");
    if (dim > kMaxMasterEquationDim)
        throw NumericError("evolve_master_equation: dimension "
                           + std::to_string(dim) + " exceeds the dense limit "
                           + std::to_string(kMaxMasterEquationDim)
                           + "; use mcwf_trajectories");
    require_hermitian(h, "evolve_master_equation");
    int const n_max = motional_dim(dim, space);

    // Work in the eigenbasis of H, where the free evolution is a phase.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (h + h.adjoint()));
    Eigen::MatrixXcd const& v = es.eigenvectors();
    Eigen::VectorXd const& e = es.eigenvalues();
    // P(tau)_{jk} = exp(-i (e_j - e_k) tau) as an outer product
    auto phase_matrix = [&](double tau)
    {
        Eigen::VectorXcd u(e.size());
        for (Eigen::Index j = 0; j < e.size(); ++j)
            u[j] = std::polar(1.0, -e[j] * tau);
        return Eigen::MatrixXcd(u * u.adjoint());
    };

    auto jumps = jump_operators(spec, n_max, space);
    std::vector<Eigen::MatrixXcd> lt;
    Eigen::MatrixXcd anti = Eigen::MatrixXcd::Zero(dim, dim);
    for (auto const& l : jumps)
    {
        lt.push_back(v.adjoint() * l * v);
        anti += lt.back().adjoint() * lt.back();
    }
    auto dissipator = [&](Eigen::MatrixXcd const& x)
    {
        Eigen::MatrixXcd out = -0.5 * (anti * x + x * anti);
        for (auto const& l : lt)
            out.noalias() += l * x * l.adjoint();
        return out;
    };

    Eigen::MatrixXcd x = v.adjoint() * rho * v;
    if (!lt.empty() && t > 0.0)
    {
        double lam = rate_bound(jumps);
        namespace ode = boost::numeric::odeint;
        using State = std::vector<double>;
        auto const n2 = dim * dim;
        // complex matrix stored as interleaved re/im doubles, column major
        auto view = [n = dim](State& st)
        { return Eigen::Map<Eigen::MatrixXcd>(reinterpret_cast<cplx*>(st.data()), n, n); };
        auto cview = [n = dim](State const& st)
        {
            return Eigen::Map<Eigen::MatrixXcd const>(
                reinterpret_cast<cplx const*>(st.data()), n, n);
        };
        // interaction-picture generator f(tau, X) = P(-tau) D(P(tau) X)
        auto f = [&](State const& xs, State& dxs, double tau)
        {
            Eigen::MatrixXcd p = phase_matrix(tau);
            Eigen::MatrixXcd d = dissipator(cview(xs).cwiseProduct(p));
            view(dxs) = d.cwiseProduct(p.conjugate());
        };
        State st(static_cast<std::size_t>(2 * n2));
        view(st) = x;
        double dt0 = std::min(t, 0.1 / std::max(lam, 1e-300));
        ode::integrate_adaptive(
            ode::make_controlled<ode::runge_kutta_dopri5<State>>(kAbsTolerance,
                                                                kRelTolerance),
            f, st, 0.0, t, dt0);
        x = view(st);
    }
    DensityMatrix out = v * x.cwiseProduct(phase_matrix(t)) * v.adjoint();
    out = 0.5 * (out + out.adjoint()).eval();

    double tr = out.trace().real();
    double tr0 = rho.trace().real();
    if (std::abs(tr - tr0) > 1e-8)
        throw NumericError("evolve_master_equation: trace drifted by "
                           + std::to_string(tr - tr0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> check(out,
                                                          Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() < -1e-8)
        throw NumericError("evolve_master_equation: result not positive "
                           "(min eigenvalue "
                           + std::to_string(check.eigenvalues().minCoeff())
                           + ")");
    return out;
}

//---------------------------------------------------------------------------//
// Monte-Carlo wavefunction
//---------------------------------------------------------------------------//

TrajectoryAverage mcwf_trajectories(Eigen::VectorXcd const& psi0,
                                    OperatorMatrix const& h,
                                    DecoherenceSpec const& spec,
                                    double t,
                                    int n_traj,
                                    std::uint64_t seed,
                                    Space space,
                                    bool keep_states)
{
    spec.validate();
    if (n_traj <= 0)
        throw ValidationError("mcwf_trajectories: n_traj must be > 0");
    if (!(std::isfinite(t) && t >= 0.0))
        throw ValidationError("mcwf_trajectories: time must be >= 0");
    auto const dim = psi0.size();
    if (h.rows() != dim || h.cols() != dim)
        throw ValidationError("mcwf_trajectories: dimension mismatch");
    if (std::abs(psi0.squaredNorm() - 1.0) > 1e-9)
        throw ValidationError("mcwf_trajectories: initial state not normalized");
    require_hermitian(h, "mcwf_trajectories");
    int const n_max = motional_dim(dim, space);

    auto jumps = jump_operators(spec, n_max, space);
    Eigen::MatrixXcd heff = h;
    for (auto const& l : jumps)
        heff -= cplx{0.0, 0.5} * (l.adjoint() * l);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(heff);
    if (ces.info() != Eigen::Success)
        throw NumericError("mcwf_trajectories: eigendecomposition failed");
    Eigen::MatrixXcd const& v = ces.eigenvectors();
    Eigen::VectorXcd const& lam = ces.eigenvalues();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
    if (!(lu.rcond() > 1e-12))
        throw NumericError("mcwf_trajectories: effective Hamiltonian is not "
                           "diagonalizable to working precision");

    auto evolve = [&](Eigen::VectorXcd const& c, double tau)
    {
        Eigen::VectorXcd w(c.size());
        for (Eigen::Index k = 0; k < c.size(); ++k)
            w[k] = c[k] * std::exp(cplx{0.0, -1.0} * lam[k] * tau);
        return Eigen::VectorXcd(v * w);
    };

    TrajectoryAverage result;
    result.n_traj = n_traj;
    result.per_trajectory.assign(static_cast<std::size_t>(n_traj), {});
    std::vector<double> spin_down(static_cast<std::size_t>(n_traj), 0.0);
    std::vector<int> n_jumps(static_cast<std::size_t>(n_traj), 0);
    if (keep_states)
        result.final_states.resize(static_cast<std::size_t>(n_traj));

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_traj; ++k)
    {
        Philox4x32 rng(seed, static_cast<std::uint64_t>(k));
        Eigen::VectorXcd psi = psi0;
        double clock = 0.0;
        int count = 0;
        while (true)
        {
            double remaining = t - clock;
            Eigen::VectorXcd c = lu.solve(psi);
            double target = rng.uniform_open();
            Eigen::VectorXcd end = evolve(c, remaining);
            if (jumps.empty() || end.squaredNorm() > target)
            {
                psi = end;
                break;
            }
            // norm decays monotonically: bisect for the jump time
            double lo = 0.0, hi = remaining;
            for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(t, 1e-300);
                 ++it)
            {
                double mid = 0.5 * (lo + hi);
                if (evolve(c, mid).squaredNorm() > target)
                    lo = mid;
                else
                    hi = mid;
            }
            double tau = 0.5 * (lo + hi);
            psi = evolve(c, tau);
            clock += tau;

            std::vector<double> w(jumps.size());
            std::vector<Eigen::VectorXcd> out(jumps.size());
            double wsum = 0.0;
            for (std::size_t j = 0; j < jumps.size(); ++j)
            {
                out[j] = jumps[j] * psi;
                w[j] = out[j].squaredNorm();
                wsum += w[j];
            }
            double pick = rng.uniform_open() * wsum;
            std::size_t chosen = 0;
            for (; chosen + 1 < jumps.size(); ++chosen)
            {
                if (pick < w[chosen])
                    break;
                pick -= w[chosen];
            }
            psi = out[chosen] / std::sqrt(w[chosen]);
            ++count;
            if (clock >= t)
                break;
        }
        psi /= psi.norm();

        std::vector<double> pops(static_cast<std::size_t>(n_max), 0.0);
        for (int n = 0; n < n_max; ++n)
        {
            double p = std::norm(psi[n]);
            if (space == Space::spin_motion)
                p += std::norm(psi[n + n_max]);
            pops[static_cast<std::size_t>(n)] = p;
        }
        if (space == Space::spin_motion)
            spin_down[static_cast<std::size_t>(k)]
                = psi.head(n_max).squaredNorm();
        result.per_trajectory[static_cast<std::size_t>(k)] = std::move(pops);
        n_jumps[static_cast<std::size_t>(k)] = count;
        if (keep_states)
            result.final_states[static_cast<std::size_t>(k)] = psi;
    }

    auto mean_sem = [n_traj](auto get, double& mean, double& sem)
    {
        double s = 0.0, s2 = 0.0;
        for (int k = 0; k < n_traj; ++k)
        {
            double x = get(k);
            s += x;
            s2 += x * x;
        }
        mean = s / n_traj;
        double var = n_traj > 1
                         ? std::max(0.0, (s2 - n_traj * mean * mean) / (n_traj - 1))
                         : 0.0;
        sem = std::sqrt(var / n_traj);
    };

    result.fock_mean.resize(static_cast<std::size_t>(n_max));
    result.fock_sem.resize(static_cast<std::size_t>(n_max));
    for (int n = 0; n < n_max; ++n)
    {
        mean_sem([&](int k)
                 { return result.per_trajectory[static_cast<std::size_t>(k)]
                                                [static_cast<std::size_t>(n)]; },
                 result.fock_mean[static_cast<std::size_t>(n)],
                 result.fock_sem[static_cast<std::size_t>(n)]);
    }
    if (space == Space::spin_motion)
        mean_sem([&](int k) { return spin_down[static_cast<std::size_t>(k)]; },
                 result.spin_down_mean,
                 result.spin_down_sem);
    for (int c : n_jumps)
        result.total_jumps += c;
    return result;
}

//---------------------------------------------------------------------------//

DensityMatrix motional_state(DensityMatrix const& rho, Space space)
{
    if (space == Space::motion)
        return rho;
    int n = motional_dim(rho.rows(), space);
    return rho.topLeftCorner(n, n) + rho.bottomRightCorner(n, n);
}

std::vector<double> fock_populations(DensityMatrix const& rho, Space space)
{
    DensityMatrix m = motional_state(rho, space);
    std::vector<double> p(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        p[static_cast<std::size_t>(n)] = m(n, n).real();
    return p;
}

}  // namespace fockcat
