#include "fockcat/spin_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fockcat/errors.hpp"
#include "fockcat/special_functions.hpp"

namespace fockcat
{
namespace
{
constexpr int kEigenPropagatorMaxDim = 1024;
constexpr int kKrylovDim = 30;
constexpr double kKrylovTolerance = 1e-10;

bool finite(cplx z)
{
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Raising operator with the Lamb-Dicke elements M_n / (i eta) on the
// subdiagonal, or the plain a^dag at eta = 0.
OperatorMatrix raising_operator(double eta, int n_max)
{
    OperatorMatrix r = OperatorMatrix::Zero(n_max, n_max);
    auto s = sideband_scalings(eta, n_max - 1);
    for (int n = 0; n + 1 < n_max; ++n)
        r(n + 1, n) = s[static_cast<std::size_t>(n)];
    return r;
}

// Motional operator X in H = X sigma_- + X^dag sigma_+.
OperatorMatrix probe_coupling(HamiltonianSpec const& spec, int n_max)
{
    OperatorMatrix r = raising_operator(spec.eta, n_max);
    OperatorMatrix x = r;
    using Kind = HamiltonianSpec::Kind;
    if (spec.kind == Kind::squeezed_probe
        || spec.kind == Kind::probe_with_displacement)
    {
        double c = std::cosh(spec.r);
        double t = std::tanh(spec.r);
        cplx ph = std::polar(1.0, -spec.phi_s);
        x = c * (r + t * ph * OperatorMatrix(r.adjoint()));
    }
    if (spec.kind == Kind::probe_with_displacement)
    {
        // S D a^dag D^dag S^dag = cosh r (a^dag + tanh r e^{-i phi} a) - beta^*
        x -= std::conj(spec.beta)
             * OperatorMatrix::Identity(n_max, n_max);
    }
    return 0.5 * spec.omega * x;
}

OperatorMatrix spin_coupled(OperatorMatrix const& x, int n_max)
{
    OperatorMatrix h = OperatorMatrix::Zero(2 * n_max, 2 * n_max);
    // sigma_- = |down><up|: down rows, up columns
    h.block(0, n_max, n_max, n_max) = x;
    h.block(n_max, 0, n_max, n_max) = x.adjoint();
    return h;
}

}  // namespace

//---------------------------------------------------------------------------//
// SpinFockState
//---------------------------------------------------------------------------//

Eigen::VectorXcd SpinFockState::joint() const
{
    Eigen::VectorXcd v(down.size() + up.size());
    v << down, up;
    return v;
}

SpinFockState SpinFockState::from_joint(Eigen::VectorXcd const& v)
{
    if (v.size() % 2 != 0 || v.size() == 0)
        throw ValidationError("SpinFockState: joint vector has odd length");
    auto n = v.size() / 2;
    return {v.head(n), v.tail(n)};
}

SpinFockState
SpinFockState::product(cplx c_down, cplx c_up, FockVector const& motion)
{
    double norm = std::norm(c_down) + std::norm(c_up);
    if (std::abs(norm - 1.0) > kNormTolerance)
        throw ValidationError("SpinFockState: spin amplitudes not normalized");
    return {c_down * motion.amps(), c_up * motion.amps()};
}

SpinFockState entangled_cat_state(cplx alpha, int n_max)
{
    Eigen::VectorXcd plus = coherent_state(alpha, n_max).amps();
    Eigen::VectorXcd minus = coherent_state(-alpha, n_max).amps();
    return {0.5 * (plus + minus), 0.5 * (plus - minus)};
}

//---------------------------------------------------------------------------//
// Hamiltonians
//---------------------------------------------------------------------------//

void HamiltonianSpec::validate() const
{
    if (!(std::isfinite(omega) && omega >= 0.0))
        throw ValidationError("HamiltonianSpec: omega must be finite and >= 0");
    if (!(std::isfinite(eta) && eta >= 0.0))
        throw ValidationError("HamiltonianSpec: eta must be finite and >= 0");
    if (!(std::isfinite(r) && r >= 0.0))
        throw ValidationError("HamiltonianSpec: r must be finite and >= 0");
    if (!std::isfinite(phi_s) || !std::isfinite(phase) || !finite(beta))
        throw ValidationError("HamiltonianSpec: non-finite phase or beta");
}

void require_hermitian(OperatorMatrix const& h, char const* what)
{
    if (h.rows() != h.cols())
        throw NumericError(std::string(what) + ": operator not square");
    double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    double err = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (!(err <= 1e-12 * scale))
        throw NumericError(std::string(what) + ": operator not Hermitian");
}

OperatorMatrix build_hamiltonian(HamiltonianSpec const& spec, int n_max)
{
    spec.validate();
    if (n_max < 2)
        throw ValidationError("build_hamiltonian: n_max must be >= 2");
    using Kind = HamiltonianSpec::Kind;
    OperatorMatrix h;
    switch (spec.kind)
    {
        case Kind::state_dependent_force: {
            OperatorMatrix a = annihilation_operator(n_max);
            cplx ph = std::polar(1.0, spec.phase);
            OperatorMatrix x = 0.5 * spec.omega
                               * (std::conj(ph) * a + ph * OperatorMatrix(a.adjoint()));
            h = OperatorMatrix::Zero(2 * n_max, 2 * n_max);
            h.block(0, n_max, n_max, n_max) = x;
            h.block(n_max, 0, n_max, n_max) = x;
            break;
        }
        case Kind::carrier_displacement:
            h = spin_coupled(0.5 * spec.omega * spec.beta
                                 * OperatorMatrix::Identity(n_max, n_max),
                             n_max);
            break;
        case Kind::red_sideband:
        case Kind::squeezed_probe:
        case Kind::probe_with_displacement:
            h = spin_coupled(probe_coupling(spec, n_max), n_max);
            break;
        default:
            throw ValidationError("build_hamiltonian: unknown kind");
    }
    require_hermitian(h, "build_hamiltonian");
    return h;
}

//---------------------------------------------------------------------------//
// Propagator
//---------------------------------------------------------------------------//

Propagator::Propagator(OperatorMatrix h, Method method)
    : h_(std::move(h)), method_(method)
{
    require_hermitian(h_, "Propagator");
    if (method_ == Method::automatic)
        method_ = h_.rows() <= kEigenPropagatorMaxDim ? Method::eigen
                                                       : Method::krylov;
    if (method_ == Method::eigen)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
            0.5 * (h_ + h_.adjoint()));
        if (es.info() != Eigen::Success)
            throw NumericError("Propagator: eigendecomposition failed");
        vecs_ = es.eigenvectors();
        vals_ = es.eigenvalues();
    }
}

Eigen::VectorXcd Propagator::apply(Eigen::VectorXcd const& psi, double t) const
{
    if (psi.size() != h_.rows())
        throw ValidationError("Propagator: state dimension mismatch");
    if (t == 0.0)
        return psi;
    if (method_ == Method::krylov)
        return apply_krylov(psi, t);
    Eigen::VectorXcd c = vecs_.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k)
        c[k] *= std::polar(1.0, -vals_[k] * t);
    return vecs_ * c;
}

// Lanczos propagator with step halving on the a-posteriori error estimate
// |h_{m+1,m} tau| |[exp(-i T tau)]_{m,1}|.
Eigen::VectorXcd
Propagator::apply_krylov(Eigen::VectorXcd const& psi, double t) const
{
    Eigen::VectorXcd v = psi;
    double const norm0 = v.norm();
    if (norm0 == 0.0)
        return v;
    double remaining = t;
    double step = t;
    auto const n = h_.rows();
    int const m = static_cast<int>(std::min<Eigen::Index>(kKrylovDim, n));

    while (std::abs(remaining) > 0.0)
    {
        double nv = v.norm();
        Eigen::MatrixXcd q(n, m + 1);
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
        q.col(0) = v / nv;
        int dim = m;
        for (int j = 0; j < m; ++j)
        {
            Eigen::VectorXcd w = h_ * q.col(j);
            alpha[j] = q.col(j).dot(w).real();
            w -= alpha[j] * q.col(j);
            if (j > 0)
                w -= beta[j] * q.col(j - 1);
            // full reorthogonalization keeps the small basis clean
            for (int k = 0; k <= j; ++k)
                w -= q.col(k).dot(w) * q.col(k);
            beta[j + 1] = w.norm();
            if (beta[j + 1] < 1e-14 * nv)
            {
                dim = j + 1;
                break;
            }
            q.col(j + 1) = w / beta[j + 1];
        }
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(dim, dim);
        for (int j = 0; j < dim; ++j)
        {
            tri(j, j) = alpha[j];
            if (j + 1 < dim)
                tri(j, j + 1) = tri(j + 1, j) = beta[j + 1];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);

        double tau = std::copysign(std::min(std::abs(step), std::abs(remaining)),
                                   remaining);
        Eigen::VectorXcd y;
        while (true)
        {
            Eigen::VectorXcd c = es.eigenvectors().row(0).transpose().cast<cplx>();
            for (int k = 0; k < dim; ++k)
                c[k] *= std::polar(1.0, -es.eigenvalues()[k] * tau);
            y = es.eigenvectors().cast<cplx>() * c;
            double err = dim < m ? 0.0 : beta[m] * std::abs(tau * y[dim - 1]);
            if (err <= kKrylovTolerance * std::abs(tau) / std::abs(t)
                || std::abs(tau) < 1e-12 * std::abs(t))
                break;
            tau *= 0.5;
        }
        v = nv * (q.leftCols(dim) * y);
        remaining -= tau;
        step = 2.0 * tau;
        if (std::abs(remaining) < 1e-15 * std::abs(t))
            break;
    }
    // keep the norm exactly as on entry; drift is below the error target
    return v * (norm0 / v.norm());
}

SpinFockState evolve_unitary(SpinFockState const& state,
                             OperatorMatrix const& h,
                             double t)
{
    if (!std::isfinite(t))
        throw ValidationError("evolve_unitary: non-finite time");
    Propagator prop(h);
    return SpinFockState::from_joint(prop.apply(state.joint(), t));
}

SpinFockState carrier_flip(SpinFockState const& state)
{
    // exp(-i pi sigma_x / 2) = -i sigma_x
    cplx const mi{0.0, -1.0};
    return {mi * state.up, mi * state.down};
}

HeraldResult herald_project(SpinFockState const& state,
                            SpinOutcome outcome,
                            bool carrier_flip_first)
{
    double norm = state.norm_squared();
    if (std::abs(norm - 1.0) > 1e-9)
        throw ValidationError("herald_project: state not normalized");
    SpinFockState s = carrier_flip_first ? carrier_flip(state) : state;
    Eigen::VectorXcd const& branch
        = outcome == SpinOutcome::up ? s.up : s.down;
    double prob = branch.squaredNorm();
    if (!(prob > 1e-14))
        throw NumericError("herald_project: zero-probability branch");
    return {FockVector(branch / std::sqrt(prob), false), prob};
}

//---------------------------------------------------------------------------//
// Matrix elements
//---------------------------------------------------------------------------//

cplx lamb_dicke_matrix_element(int n, double eta)
{
    if (n < 0)
        throw ValidationError("lamb_dicke_matrix_element: n must be >= 0");
    if (!(std::isfinite(eta) && eta >= 0.0))
        throw ValidationError("lamb_dicke_matrix_element: eta must be >= 0");
    if (eta == 0.0)
        return {0.0, 0.0};
    double x = eta * eta;
    auto lag = laguerre_column(n + 1, 1, x);
    LogScaled const& l = lag[static_cast<std::size_t>(n)];
    double mag = std::exp(l.log_abs + std::log(eta) - 0.5 * x
                          - 0.5 * std::log(n + 1.0));
    return {0.0, l.sign * mag};
}

cplx lamb_dicke_matrix_element_numeric(int n, double eta, int dim)
{
    if (dim < n + 2)
        throw ValidationError("lamb_dicke_matrix_element_numeric: dim too small");
    OperatorMatrix a = annihilation_operator(dim);
    OperatorMatrix gen = cplx{0.0, eta} * (a + OperatorMatrix(a.adjoint()));
    OperatorMatrix u = gen.exp();
    return u(n + 1, n);
}

void verify_lamb_dicke_elements(int n_count, double eta)
{
    int dim = 2 * n_count + 60;
    OperatorMatrix a = annihilation_operator(dim);
    OperatorMatrix u
        = (cplx{0.0, eta} * (a + OperatorMatrix(a.adjoint()))).exp();
    for (int n = 0; n < n_count; ++n)
    {
        cplx closed = lamb_dicke_matrix_element(n, eta);
        if (std::abs(closed - u(n + 1, n)) > 1e-9)
            throw NumericError("lamb_dicke_matrix_element: closed form "
                               "disagrees with the matrix exponential at n = "
                               + std::to_string(n));
    }
}

std::vector<double> sideband_scalings(double eta, int n_count)
{
    std::vector<double> s(static_cast<std::size_t>(std::max(n_count, 0)));
    if (n_count <= 0)
        return s;
    if (eta == 0.0)
    {
        for (int n = 0; n < n_count; ++n)
            s[static_cast<std::size_t>(n)] = std::sqrt(n + 1.0);
        return s;
    }
    double x = eta * eta;
    auto lag = laguerre_column(n_count, 1, x);
    for (int n = 0; n < n_count; ++n)
    {
        auto const& l = lag[static_cast<std::size_t>(n)];
        s[static_cast<std::size_t>(n)]
            = l.sign * std::exp(l.log_abs - 0.5 * x - 0.5 * std::log(n + 1.0));
    }
    return s;
}

std::vector<double> rabi_frequencies(ProbeBasis const& basis,
                                     double omega,
                                     double eta,
                                     int n_count)
{
    basis.validate();
    if (n_count <= 0)
        return {};
    if (!(std::isfinite(eta) && eta >= 0.0))
        throw ValidationError("rabi_frequencies: eta must be >= 0");
    std::vector<double> out;
    if (!basis.has_squeeze() || basis.r <= kNumericSqueezeThreshold)
    {
        out = sideband_scalings(eta, n_count);
        for (double& x : out)
            x = omega * std::abs(x);
        return out;
    }

    // Squeezed Fock states |n_s> = S|n> for n <= n_count, on a space large
    // enough that every column keeps its norm.
    int const cols = n_count + 1;
    int dim = cols + 64;
    OperatorMatrix s;
    while (true)
    {
        s = squeeze_block(basis.r, basis.phi_s, dim, cols);
        double worst = 0.0;
        for (int k = 0; k < cols; ++k)
            worst = std::max(worst, std::abs(1.0 - s.col(k).squaredNorm()));
        if (worst < 1e-12)
            break;
        if (dim > 8192)
            throw TruncationError("rabi_frequencies: squeezed Fock states "
                                  "do not fit the working space");
        dim *= 2;
    }
    HamiltonianSpec spec;
    spec.kind = HamiltonianSpec::Kind::squeezed_probe;
    spec.omega = 2.0;  // coupling operator without the omega/2 prefactor
    spec.eta = eta;
    spec.r = basis.r;
    spec.phi_s = basis.phi_s;
    OperatorMatrix x = probe_coupling(spec, dim);
    OperatorMatrix elems = s.adjoint() * (x * s);
    out.resize(static_cast<std::size_t>(n_count));
    for (int n = 0; n < n_count; ++n)
        out[static_cast<std::size_t>(n)] = omega * std::abs(elems(n + 1, n));
    return out;
}

}  // namespace fockcat
