#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fockcat
{
using cplx = std::complex<double>;

//! Dense operator on a truncated number basis (or on spin x number).
using OperatorMatrix = Eigen::MatrixXcd;
//! Dense density matrix; same storage as an operator.
using DensityMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHbar = 1.054571817e-34;             // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kCalcium40Mass = 39.962590866 * kAtomicMassUnit;

//! Normalization tolerance for state constructors.
inline constexpr double kNormTolerance = 1e-10;
//! Maximum mass allowed in the top five levels of a truncated state.
inline constexpr double kTailTolerance = 1e-8;

//---------------------------------------------------------------------------//
/*!
 * Pure oscillator state on the truncated basis |0>..|dim-1>.
 *
 * Construction normalizes (optionally) and then enforces the two truncation
 * invariants: unit norm within 1e-10 and less than 1e-8 of the probability in
 * the top five levels. Violations throw TruncationError.
 */
class FockVector
{
  public:
    explicit FockVector(Eigen::VectorXcd amps, bool normalize = true);

    int dim() const { return static_cast<int>(amps_.size()); }
    Eigen::VectorXcd const& amps() const { return amps_; }
    cplx operator[](int n) const { return amps_[n]; }

    //! <a^dagger a>
    double mean_occupation() const;

  private:
    Eigen::VectorXcd amps_;
};

//! Mass in the top five levels of an amplitude vector.
double tail_mass(Eigen::VectorXcd const& amps);

//! Truncation size rule: ceil(|alpha|^2 + 8|alpha| + 30), doubled when the
//! analysis basis is squeezed by more than r = 0.5.
int default_n_max(cplx alpha, double squeeze_r = 0.0);

FockVector fock_state(int n, int n_max);

//! |alpha> = e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>.
//! Requires n_max > |alpha|^2 + 8|alpha| + 20.
FockVector coherent_state(cplx alpha, int n_max);

enum class CatParity
{
    even,  //!< (|alpha> + |-alpha>), psi_+
    odd    //!< (|alpha> - |-alpha>), psi_-
};

FockVector cat_state(cplx alpha, CatParity parity, int n_max);

//! Which of the two independent constructions to use for a unitary.
enum class OperatorMethod
{
    closed_form,        //!< exact matrix elements (Laguerre / recurrence)
    matrix_exponential  //!< exponential of the truncated generator
};

OperatorMatrix annihilation_operator(int n_max);
OperatorMatrix number_operator(int n_max);
OperatorMatrix parity_operator(int n_max);

//! D(beta) = exp(beta a^dag - beta^* a).
//!
//! The closed form gives exact (untruncated) matrix elements; the matrix
//! exponential is unitary on the truncated space but wrong near the cutoff.
//! Both are checked for unitarity on the n < n_max/2 block and throw
//! TruncationError when that fails.
OperatorMatrix displacement_operator(cplx beta,
                                     int n_max,
                                     OperatorMethod method
                                     = OperatorMethod::closed_form);

//! S(xi) = exp((xi^* a^2 - xi a^dag^2) / 2), xi = r e^{i phi_s}.
//! Only r <= 1.5 is accepted.
OperatorMatrix squeeze_operator(double r,
                                double phi_s,
                                int n_max,
                                OperatorMethod method
                                = OperatorMethod::closed_form);

//! Rectangular blocks of the exact matrix elements <m|D|n> and <m|S|n>,
//! m < rows, n < cols.
OperatorMatrix displacement_block(cplx beta, int rows, int cols);
OperatorMatrix squeeze_block(double r, double phi_s, int rows, int cols);

//---------------------------------------------------------------------------//
/*!
 * Analysis basis |phi_n> = S(xi) D(beta) |n>, xi = r e^{i phi_s}.
 *
 * The squeeze is applied after the displacement. Number, Squeezed and
 * Displaced are the special cases with the unused parameters at zero.
 */
struct ProbeBasis
{
    enum class Kind
    {
        number,
        squeezed,
        displaced,
        displaced_squeezed
    };

    Kind kind = Kind::number;
    cplx beta{0.0, 0.0};
    double r = 0.0;
    double phi_s = 0.0;

    static ProbeBasis number() { return {}; }
    static ProbeBasis squeezed(double r, double phi_s)
    {
        return {Kind::squeezed, {}, r, phi_s};
    }
    static ProbeBasis displaced(cplx beta)
    {
        return {Kind::displaced, beta, 0.0, 0.0};
    }
    static ProbeBasis displaced_squeezed(cplx beta, double r, double phi_s)
    {
        return {Kind::displaced_squeezed, beta, r, phi_s};
    }

    bool has_squeeze() const
    {
        return kind == Kind::squeezed || kind == Kind::displaced_squeezed;
    }
    bool has_displacement() const
    {
        return kind == Kind::displaced || kind == Kind::displaced_squeezed;
    }

    //! Phase-space point probed by the displaced parity in this basis:
    //! S D(beta) S^dag = D(beta_eff), with
    //! beta_eff = beta cosh r - beta^* e^{i phi_s} sinh r.
    cplx effective_point() const;

    //! Throws ValidationError on negative r or non-finite parameters.
    void validate() const;
};

std::string to_string(ProbeBasis::Kind kind);
ProbeBasis::Kind basis_kind_from_string(std::string const& name);

//! Probabilities p[n] = |<phi_n|state>|^2 in a given basis.
struct PopulationVector
{
    std::vector<double> p;
    ProbeBasis basis;

    double total() const;
    double mean_level() const;
};

//! Amplitudes <phi_n|psi> for n < out_dim.
Eigen::VectorXcd basis_overlaps(Eigen::VectorXcd const& psi,
                                ProbeBasis const& basis,
                                int out_dim);

//! Populations of a pure state in the given basis. The output length grows
//! until less than 1e-8 probability is lost to the cutoff; if that cannot be
//! reached below the dimension cap, throws TruncationError.
PopulationVector
populations_in_basis(FockVector const& state, ProbeBasis const& basis);

//! Populations of a mixed motional state (Hermitian, unit trace).
PopulationVector
populations_in_basis(DensityMatrix const& rho, ProbeBasis const& basis);

//! sum_n (-1)^n p[n]
double parity(std::span<double const> p);
double parity(PopulationVector const& pops);

//! <n_s> = |alpha|^2 e^{-2r} + sinh^2 r for a cat or coherent state analyzed
//! with the squeeze axis perpendicular to the separation axis.
double squeezed_mean_occupation(cplx alpha, double r);

//! Squeeze magnitude minimizing squeezed_mean_occupation: ln(4|alpha|^2+1)/4.
double optimal_squeeze(cplx alpha);

//! Squeeze phase aligning anti-squeezing with the cat axis: 2 arg(alpha) + pi.
double aligned_squeeze_phase(cplx alpha);

//! dB = 10 log10(e^{2r})
double squeeze_db_to_r(double db);
double squeeze_r_to_db(double r);

struct PhysicalScale
{
    double z0;          //!< ground-state rms extent [m]
    double separation;  //!< distance between wavepacket centers [m]
};

//! z0 = sqrt(hbar / (2 m omega_z)); separation = 2 * (2|alpha|) * z0.
PhysicalScale physical_units(double omega_z, double mass, cplx alpha);

}  // namespace fockcat
