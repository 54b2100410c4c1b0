#include "fockcat/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "fockcat/errors.hpp"
#include "fockcat/special_functions.hpp"

namespace fockcat
{
namespace
{
constexpr int kMaxAnalysisDim = 3072;
constexpr double kUnitarityTolerance = 1e-8;

std::vector<double> log_factorial_table(int n)
{
    std::vector<double> t(static_cast<std::size_t>(std::max(n, 1)));
    for (int i = 0; i < n; ++i)
        t[static_cast<std::size_t>(i)] = log_factorial(i);
    return t;
}

// Checks U^dag U = 1 on the leading `half` columns (default n_max / 2).
void check_unitary_block(OperatorMatrix const& u, char const* what, int half = -1)
{
    if (half < 0)
        half = static_cast<int>(u.cols()) / 2;
    if (half == 0)
        return;
    Eigen::MatrixXcd block = u.leftCols(half).adjoint() * u.leftCols(half);
    double err = (block - Eigen::MatrixXcd::Identity(half, half))
                     .cwiseAbs()
                     .maxCoeff();
    if (!(err < kUnitarityTolerance))
    {
        throw TruncationError(std::string(what)
                              + ": not unitary on the safe leading block "
                                "(max deviation "
                              + std::to_string(err)
                              + "); increase n_max");
    }
}

// A squeezed |n> occupies roughly n e^{2r} levels with a slowly decaying
// tail, so the block that can be unitary shrinks with r.
int squeeze_safe_block(double r, int n_max)
{
    if (r == 0.0)
        return n_max / 2;
    return static_cast<int>(std::floor(0.25 * n_max * std::exp(-2.0 * r)));
}

void require_positive_dim(int n, char const* what)
{
    if (n <= 0)
        throw ValidationError(std::string(what) + ": dimension must be > 0");
}

}  // namespace

//---------------------------------------------------------------------------//
// FockVector
//---------------------------------------------------------------------------//

FockVector::FockVector(Eigen::VectorXcd amps, bool normalize)
    : amps_(std::move(amps))
{
    if (amps_.size() == 0)
        throw ValidationError("FockVector: empty amplitude list");
    if (!amps_.allFinite())
        throw ValidationError("FockVector: non-finite amplitude");
    double norm2 = amps_.squaredNorm();
    if (normalize)
    {
        if (norm2 <= 0.0)
            throw ValidationError("FockVector: zero vector");
        amps_ /= std::sqrt(norm2);
        norm2 = amps_.squaredNorm();
    }
    if (std::abs(norm2 - 1.0) > kNormTolerance)
        throw ValidationError("FockVector: state is not normalized");
    double tail = tail_mass(amps_);
    if (!(tail < kTailTolerance))
    {
        throw TruncationError("FockVector: tail mass " + std::to_string(tail)
                              + " in the top five levels of a "
                              + std::to_string(amps_.size())
                              + "-level basis; increase n_max");
    }
}

double FockVector::mean_occupation() const
{
    double m = 0.0;
    for (int n = 0; n < dim(); ++n)
        m += n * std::norm(amps_[n]);
    return m;
}

double tail_mass(Eigen::VectorXcd const& amps)
{
    auto n = static_cast<int>(amps.size());
    int start = std::max(0, n - 5);
    return amps.segment(start, n - start).squaredNorm();
}

int default_n_max(cplx alpha, double squeeze_r)
{
    double a = std::abs(alpha);
    int n = static_cast<int>(std::ceil(a * a + 8.0 * a + 30.0));
    return squeeze_r > 0.5 ? 2 * n : n;
}

FockVector fock_state(int n, int n_max)
{
    if (n < 0 || n + 5 >= n_max)
        throw TruncationError("fock_state: level must lie below n_max - 5");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max);
    v[n] = 1.0;
    return FockVector(std::move(v), false);
}

FockVector coherent_state(cplx alpha, int n_max)
{
    double a = std::abs(alpha);
    if (!(n_max > a * a + 8.0 * a + 20.0))
    {
        throw TruncationError("coherent_state: n_max = "
                              + std::to_string(n_max)
                              + " too small for |alpha| = "
                              + std::to_string(a)
                              + " (need > |alpha|^2 + 8|alpha| + 20)");
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max);
    if (a == 0.0)
    {
        v[0] = 1.0;
        return FockVector(std::move(v), false);
    }
    double const log_a = std::log(a);
    double const phase = std::arg(alpha);
    for (int n = 0; n < n_max; ++n)
    {
        double log_mag = -0.5 * a * a + n * log_a - 0.5 * log_factorial(n);
        v[n] = std::polar(std::exp(log_mag), n * phase);
    }
    return FockVector(std::move(v));
}

FockVector cat_state(cplx alpha, CatParity parity, int n_max)
{
    FockVector coh = coherent_state(alpha, n_max);
    // <n|-alpha> = (-1)^n <n|alpha>
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max);
    int const keep = parity == CatParity::even ? 0 : 1;
    for (int n = keep; n < n_max; n += 2)
        v[n] = 2.0 * coh[n];
    if (v.squaredNorm() == 0.0)
        throw ValidationError("cat_state: odd cat with alpha = 0 is null");
    return FockVector(std::move(v));
}

//---------------------------------------------------------------------------//
// Operators
//---------------------------------------------------------------------------//

OperatorMatrix annihilation_operator(int n_max)
{
    require_positive_dim(n_max, "annihilation_operator");
    OperatorMatrix a = OperatorMatrix::Zero(n_max, n_max);
    for (int n = 1; n < n_max; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

OperatorMatrix number_operator(int n_max)
{
    require_positive_dim(n_max, "number_operator");
    OperatorMatrix m = OperatorMatrix::Zero(n_max, n_max);
    for (int n = 0; n < n_max; ++n)
        m(n, n) = static_cast<double>(n);
    return m;
}

OperatorMatrix parity_operator(int n_max)
{
    require_positive_dim(n_max, "parity_operator");
    OperatorMatrix m = OperatorMatrix::Zero(n_max, n_max);
    for (int n = 0; n < n_max; ++n)
        m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return m;
}

OperatorMatrix displacement_block(cplx beta, int rows, int cols)
{
    OperatorMatrix d = OperatorMatrix::Zero(rows, cols);
    double const mag = std::abs(beta);
    if (mag == 0.0)
    {
        for (int n = 0; n < std::min(rows, cols); ++n)
            d(n, n) = 1.0;
        return d;
    }
    double const x = mag * mag;
    double const log_mag = std::log(mag);
    double const phase = std::arg(beta);
    auto const lf = log_factorial_table(std::max(rows, cols));

    // Lower triangle (m = n + k):
    //   sqrt(n!/m!) beta^k e^{-x/2} L_n^{(k)}(x)
    for (int k = 0; k < rows; ++k)
    {
        int count = std::min(cols, rows - k);
        if (count <= 0)
            break;
        auto lag = laguerre_column(count, k, x);
        cplx const ph = std::polar(1.0, k * phase);
        for (int n = 0; n < count; ++n)
        {
            auto const& l = lag[static_cast<std::size_t>(n)];
            if (l.sign == 0)
                continue;
            double lm = 0.5 * (lf[static_cast<std::size_t>(n)]
                               - lf[static_cast<std::size_t>(n + k)])
                        + k * log_mag - 0.5 * x + l.log_abs;
            d(n + k, n) = static_cast<double>(l.sign) * std::exp(lm) * ph;
        }
    }
    // Upper triangle (n = m + k):
    //   sqrt(m!/n!) (-beta^*)^k e^{-x/2} L_m^{(k)}(x)
    for (int k = 1; k < cols; ++k)
    {
        int count = std::min(rows, cols - k);
        if (count <= 0)
            break;
        auto lag = laguerre_column(count, k, x);
        cplx const ph = std::polar(1.0, k * (kPi - phase));
        for (int m = 0; m < count; ++m)
        {
            auto const& l = lag[static_cast<std::size_t>(m)];
            if (l.sign == 0)
                continue;
            double lm = 0.5 * (lf[static_cast<std::size_t>(m)]
                               - lf[static_cast<std::size_t>(m + k)])
                        + k * log_mag - 0.5 * x + l.log_abs;
            d(m, m + k) = static_cast<double>(l.sign) * std::exp(lm) * ph;
        }
    }
    return d;
}

OperatorMatrix squeeze_block(double r, double phi_s, int rows, int cols)
{
    OperatorMatrix s = OperatorMatrix::Zero(rows, cols);
    if (r == 0.0)
    {
        for (int n = 0; n < std::min(rows, cols); ++n)
            s(n, n) = 1.0;
        return s;
    }
    // Within the parity sector p, with lo = p + 2 nu and hi = lo + 2 d,
    //   <hi|S(r)|lo> = sqrt(hi!/lo!) nu!/(nu+d)! cosh(r)^{-1/2-p}
    //                  (-tanh(r)/2)^d P_nu^{(d, p-1/2)}(1 - 2 tanh^2 r)
    // and <lo|S(r)|hi> is the same with tanh r -> -tanh r. A complex
    // squeeze phase enters as e^{i phi (m-n)/2}.
    double const t = std::tanh(r);
    double const x = 1.0 - 2.0 * t * t;
    double const log_half_t = std::log(0.5 * t);
    double const log_c = std::log(std::cosh(r));
    auto const lf = log_factorial_table(std::max(rows, cols) + 1);
    auto lfs = [&lf](int n) { return lf[static_cast<std::size_t>(n)]; };

    for (int p = 0; p < 2; ++p)
    {
        for (int d = 0; p + 2 * d < std::max(rows, cols); ++d)
        {
            // number of nu values needed in either triangle
            int lower_count = std::max(0, (std::min(cols, rows - 2 * d) - p + 1) / 2);
            int upper_count = d == 0 ? 0
                              : std::max(0, (std::min(rows, cols - 2 * d) - p + 1) / 2);
            int count = std::max(lower_count, upper_count);
            if (count <= 0)
                continue;
            auto jac = jacobi_column(count, d, p - 0.5, x);
            cplx const phase_down = std::polar(1.0, phi_s * d);
            cplx const phase_up = std::polar(1.0, -phi_s * d);
            double const sign_down = (d % 2 == 0) ? 1.0 : -1.0;
            for (int nu = 0; nu < count; ++nu)
            {
                auto const& j = jac[static_cast<std::size_t>(nu)];
                if (j.sign == 0)
                    continue;
                int const lo = p + 2 * nu;
                int const hi = lo + 2 * d;
                double lm = 0.5 * (lfs(hi) - lfs(lo)) + lfs(nu) - lfs(nu + d)
                            - (0.5 + p) * log_c + d * log_half_t + j.log_abs;
                double mag = j.sign * std::exp(lm);
                if (nu < lower_count && hi < rows && lo < cols)
                    s(hi, lo) = sign_down * mag * phase_down;
                if (d > 0 && nu < upper_count && lo < rows && hi < cols)
                    s(lo, hi) = mag * phase_up;
            }
        }
    }
    return s;
}

OperatorMatrix displacement_operator(cplx beta, int n_max, OperatorMethod method)
{
    require_positive_dim(n_max, "displacement_operator");
    OperatorMatrix d;
    if (method == OperatorMethod::closed_form)
    {
        d = displacement_block(beta, n_max, n_max);
    }
    else
    {
        OperatorMatrix a = annihilation_operator(n_max);
        OperatorMatrix gen = beta * a.adjoint() - std::conj(beta) * a;
        d = gen.exp();
        // the truncated exponential is always unitary; check the exact block
        check_unitary_block(displacement_block(beta, n_max, n_max / 2 + 1),
                            "displacement_operator");
    }
    check_unitary_block(d, "displacement_operator");
    return d;
}

OperatorMatrix
squeeze_operator(double r, double phi_s, int n_max, OperatorMethod method)
{
    require_positive_dim(n_max, "squeeze_operator");
    if (r < 0.0 || !std::isfinite(r) || !std::isfinite(phi_s))
        throw ValidationError("squeeze_operator: r must be finite and >= 0");
    if (r > 1.5)
    {
        throw ValidationError(
            "squeeze_operator: r > 1.5 (13 dB) is not supported; the number "
            "basis needed to represent it grows as e^{2r}. Use a smaller "
            "squeeze or split the analysis into several bases.");
    }
    OperatorMatrix s;
    if (method == OperatorMethod::closed_form)
    {
        s = squeeze_block(r, phi_s, n_max, n_max);
    }
    else
    {
        OperatorMatrix a = annihilation_operator(n_max);
        cplx const xi = std::polar(r, phi_s);
        OperatorMatrix a2 = a * a;
        OperatorMatrix gen = 0.5 * (std::conj(xi) * a2 - xi * a2.adjoint());
        s = gen.exp();
    }
    int const safe = squeeze_safe_block(r, n_max);
    check_unitary_block(method == OperatorMethod::closed_form
                            ? s
                            : OperatorMatrix(squeeze_block(r, phi_s, n_max, safe)),
                        "squeeze_operator",
                        safe);
    return s;
}

//---------------------------------------------------------------------------//
// Bases and populations
//---------------------------------------------------------------------------//

cplx ProbeBasis::effective_point() const
{
    if (!has_displacement())
        return {0.0, 0.0};
    if (!has_squeeze() || r == 0.0)
        return beta;
    return beta * std::cosh(r)
           - std::conj(beta) * std::polar(1.0, phi_s) * std::sinh(r);
}

void ProbeBasis::validate() const
{
    if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag())
        || !std::isfinite(r) || !std::isfinite(phi_s))
    {
        throw ValidationError("ProbeBasis: non-finite parameter");
    }
    if (r < 0.0)
        throw ValidationError("ProbeBasis: squeeze magnitude r must be >= 0");
    if (r > 1.5)
        throw ValidationError("ProbeBasis: squeeze magnitude r > 1.5");
}

std::string to_string(ProbeBasis::Kind kind)
{
    switch (kind)
    {
        case ProbeBasis::Kind::number:
            return "number";
        case ProbeBasis::Kind::squeezed:
            return "squeezed";
        case ProbeBasis::Kind::displaced:
            return "displaced";
        case ProbeBasis::Kind::displaced_squeezed:
            return "displaced_squeezed";
    }
    return "unknown";
}

ProbeBasis::Kind basis_kind_from_string(std::string const& name)
{
    for (auto k : {ProbeBasis::Kind::number,
                   ProbeBasis::Kind::squeezed,
                   ProbeBasis::Kind::displaced,
                   ProbeBasis::Kind::displaced_squeezed})
    {
        if (to_string(k) == name)
            return k;
    }
    throw ValidationError("unknown basis kind '" + name + "'");
}

double PopulationVector::total() const
{
    double s = 0.0;
    for (double v : p)
        s += v;
    return s;
}

double PopulationVector::mean_level() const
{
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        s += static_cast<double>(n) * p[n];
    return s;
}

Eigen::VectorXcd basis_overlaps(Eigen::VectorXcd const& psi,
                                ProbeBasis const& basis,
                                int out_dim)
{
    basis.validate();
    auto const in_dim = static_cast<int>(psi.size());
    Eigen::VectorXcd v = psi;
    // <phi_n|psi> = <n| D^dag S^dag |psi>
    if (basis.has_squeeze() && basis.r > 0.0)
    {
        OperatorMatrix s = squeeze_block(basis.r, basis.phi_s, in_dim, out_dim);
        v = s.adjoint() * psi;
    }
    if (basis.has_displacement() && basis.beta != cplx{0.0, 0.0})
    {
        auto mid = static_cast<int>(v.size());
        OperatorMatrix d = displacement_block(basis.beta, mid, out_dim);
        Eigen::VectorXcd w = d.adjoint() * v;
        v = std::move(w);
    }
    if (v.size() != out_dim)
    {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(out_dim);
        auto n = std::min<Eigen::Index>(out_dim, v.size());
        w.head(n) = v.head(n);
        v = std::move(w);
    }
    return v;
}

namespace
{
int initial_out_dim(int in_dim, ProbeBasis const& basis)
{
    int d = in_dim;
    if (basis.has_displacement())
        d += default_n_max(basis.beta);
    if (basis.has_squeeze() && basis.r > 0.5)
        d *= 2;
    return std::min(d, kMaxAnalysisDim);
}

// Populations for a weighted set of pure components, growing the output
// dimension until the lost probability is negligible.
PopulationVector
weighted_populations(std::vector<std::pair<double, Eigen::VectorXcd>> const& parts,
                     ProbeBasis const& basis,
                     int in_dim)
{
    double norm = 0.0;
    for (auto const& [w, v] : parts)
        norm += w * v.squaredNorm();

    int out_dim = basis.kind == ProbeBasis::Kind::number
                      ? in_dim
                      : initial_out_dim(in_dim, basis);
    while (true)
    {
        std::vector<double> p(static_cast<std::size_t>(out_dim), 0.0);
        for (auto const& [w, v] : parts)
        {
            Eigen::VectorXcd c = basis_overlaps(v, basis, out_dim);
            for (int n = 0; n < out_dim; ++n)
                p[static_cast<std::size_t>(n)] += w * std::norm(c[n]);
        }
        double total = 0.0;
        for (double x : p)
            total += x;
        double lost = norm - total;
        if (lost < 1e-9 || basis.kind == ProbeBasis::Kind::number)
            return {std::move(p), basis};
        if (out_dim >= kMaxAnalysisDim)
        {
            if (lost < 1e-6)
                return {std::move(p), basis};
            throw TruncationError(
                "populations_in_basis: " + std::to_string(lost)
                + " of the probability lies beyond the analysis cutoff");
        }
        out_dim = std::min(2 * out_dim, kMaxAnalysisDim);
    }
}
}  // namespace

PopulationVector
populations_in_basis(FockVector const& state, ProbeBasis const& basis)
{
    return weighted_populations({{1.0, state.amps()}}, basis, state.dim());
}

PopulationVector
populations_in_basis(DensityMatrix const& rho, ProbeBasis const& basis)
{
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        throw ValidationError("populations_in_basis: density matrix not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (rho + rho.adjoint()));
    std::vector<std::pair<double, Eigen::VectorXcd>> parts;
    for (Eigen::Index k = 0; k < rho.rows(); ++k)
    {
        double w = es.eigenvalues()[k];
        if (w > 1e-14)
            parts.emplace_back(w, es.eigenvectors().col(k));
    }
    return weighted_populations(parts, basis, static_cast<int>(rho.rows()));
}

double parity(std::span<double const> p)
{
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        s += (n % 2 == 0) ? p[n] : -p[n];
    return s;
}

double parity(PopulationVector const& pops)
{
    return parity(std::span<double const>(pops.p));
}

double squeezed_mean_occupation(cplx alpha, double r)
{
    if (r < 0.0)
        throw ValidationError("squeezed_mean_occupation: r must be >= 0");
    double sh = std::sinh(r);
    return std::norm(alpha) * std::exp(-2.0 * r) + sh * sh;
}

double optimal_squeeze(cplx alpha)
{
    return std::log(4.0 * std::norm(alpha) + 1.0) / 4.0;
}

double aligned_squeeze_phase(cplx alpha)
{
    return 2.0 * std::arg(alpha) + kPi;
}

double squeeze_db_to_r(double db)
{
    return db * std::log(10.0) / 20.0;
}

double squeeze_r_to_db(double r)
{
    return 20.0 * r / std::log(10.0);
}

PhysicalScale physical_units(double omega_z, double mass, cplx alpha)
{
    if (!(omega_z > 0.0) || !(mass > 0.0))
        throw ValidationError("physical_units: frequency and mass must be > 0");
    double z0 = std::sqrt(kHbar / (2.0 * mass * omega_z));
    double delta_alpha = 2.0 * std::abs(alpha);
    return {z0, 2.0 * delta_alpha * z0};
}

}  // namespace fockcat
