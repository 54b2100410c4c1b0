#pragma once

#include <cstdint>
#include <vector>

#include "fockcat/oscillator.hpp"

namespace fockcat
{
//---------------------------------------------------------------------------//
/*!
 * Joint pseudo-spin x oscillator pure state.
 *
 * Stored as the two motional components attached to |down> and |up>. The
 * joint vector layout used by every operator in this module is
 * [down block (n_max) | up block (n_max)].
 */
struct SpinFockState
{
    Eigen::VectorXcd down;
    Eigen::VectorXcd up;

    int n_max() const { return static_cast<int>(down.size()); }
    double norm_squared() const { return down.squaredNorm() + up.squaredNorm(); }

    Eigen::VectorXcd joint() const;
    static SpinFockState from_joint(Eigen::VectorXcd const& v);

    //! |spin> (x) |motion> with spin amplitudes (c_down, c_up).
    static SpinFockState product(cplx c_down, cplx c_up, FockVector const& motion);
};

//! (|+>|alpha> + |->|-alpha>)/sqrt(2), |+-> = (|down> +- |up>)/sqrt(2):
//! the state prepared by the state-dependent force from |down>|0>.
SpinFockState entangled_cat_state(cplx alpha, int n_max);

//---------------------------------------------------------------------------//
// Hamiltonians (in units of hbar, i.e. angular frequency)
//---------------------------------------------------------------------------//

struct HamiltonianSpec
{
    enum class Kind
    {
        //! Omega sigma_x (e^{i phase} a^dag + e^{-i phase} a) / 2;
        //! from |down>|0> it prepares alpha = -i e^{i phase} Omega t / 2
        state_dependent_force,
        //! (Omega/2) [a^dag sigma_- + h.c.]
        red_sideband,
        //! (Omega/2) [(a^dag + tanh r e^{-i phi_s} a) sigma_- + h.c.]
        squeezed_probe,
        //! (Omega/2) (beta^* sigma_+ + beta sigma_-)
        carrier_displacement,
        //! probe (squeezed or red) plus the carrier term that displaces the
        //! analysis basis to S(xi) D(beta) |n>
        probe_with_displacement
    };

    Kind kind = Kind::red_sideband;
    double omega = 0.0;  //!< Rabi rate [rad/s]
    double eta = 0.0;    //!< Lamb-Dicke parameter; 0 means the LD limit
    double r = 0.0;
    double phi_s = 0.0;
    cplx beta{0.0, 0.0};
    double phase = 0.0;  //!< drive phase of the state-dependent force

    void validate() const;
};

OperatorMatrix build_hamiltonian(HamiltonianSpec const& spec, int n_max);

//! Hermiticity check used by all propagators; throws NumericError.
void require_hermitian(OperatorMatrix const& h, char const* what);

//---------------------------------------------------------------------------//
/*!
 * exp(-i H t) acting on vectors.
 *
 * Below 1025 dimensions the Hamiltonian is diagonalized once and any time can
 * be applied exactly. Above that, a Lanczos (Krylov) propagator is used with
 * adaptive substeps and a local error target of 1e-10 per unit norm.
 */
class Propagator
{
  public:
    enum class Method
    {
        automatic,
        eigen,
        krylov
    };

    explicit Propagator(OperatorMatrix h, Method method = Method::automatic);

    Eigen::VectorXcd apply(Eigen::VectorXcd const& psi, double t) const;
    Method method() const { return method_; }

  private:
    Eigen::VectorXcd apply_krylov(Eigen::VectorXcd const& psi, double t) const;

    OperatorMatrix h_;
    Method method_;
    Eigen::MatrixXcd vecs_;
    Eigen::VectorXd vals_;
};

//! Norm-preserving unitary evolution, exp(-i H t) |state>.
SpinFockState evolve_unitary(SpinFockState const& state,
                             OperatorMatrix const& h,
                             double t);

enum class SpinOutcome
{
    down,
    up
};

struct HeraldResult
{
    FockVector motion;
    double probability;
};

//! Projects onto a spin outcome, optionally after a carrier pi pulse, and
//! returns the renormalized motional state and the branch probability.
//! Throws NumericError for a zero-probability branch.
HeraldResult herald_project(SpinFockState const& state,
                            SpinOutcome outcome,
                            bool carrier_flip_first);

//! Carrier pi pulse exp(-i pi sigma_x / 2).
SpinFockState carrier_flip(SpinFockState const& state);

//---------------------------------------------------------------------------//
// Sideband matrix elements and Rabi frequencies
//---------------------------------------------------------------------------//

//! M_n = <n+1| exp(i eta (a + a^dag)) |n> from the Laguerre closed form.
cplx lamb_dicke_matrix_element(int n, double eta);

//! Same element from the matrix exponential of i eta (a + a^dag) on a
//! truncated space of size dim. Validation oracle only.
cplx lamb_dicke_matrix_element_numeric(int n, double eta, int dim);

//! Compares the two routes for n < n_count; throws NumericError if they
//! disagree by more than 1e-9.
void verify_lamb_dicke_elements(int n_count, double eta);

//! Sideband coupling strengths relative to omega: |M_n|/eta, or sqrt(n+1)
//! at eta = 0.
std::vector<double> sideband_scalings(double eta, int n_count);

//! Squeeze magnitude above which squeezed bases use numerically generated
//! matrix elements rather than the M_n scaling.
inline constexpr double kNumericSqueezeThreshold = 0.8;

//! Omega_{n,n+1} for n < n_count in the given analysis basis.
//!
//! Number and displaced bases scale as omega |M_n| / eta. Squeezed bases with
//! r > 0.8 use cosh(r) |<n_s+1| K |n_s>|, where K is the red plus
//! tanh(r)-weighted blue sideband with full Lamb-Dicke elements, evaluated
//! between squeezed Fock states.
std::vector<double> rabi_frequencies(ProbeBasis const& basis,
                                     double omega,
                                     double eta,
                                     int n_count);

//---------------------------------------------------------------------------//
// Open-system evolution
//---------------------------------------------------------------------------//

struct DecoherenceSpec
{
    double heating_rate = 0.0;             //!< quanta/s, from the ground state
    double motional_dephasing_rate = 0.0;  //!< 1/s, decay of (|0>+|1>) coherence
    double spin_dephasing_rate = 0.0;      //!< 1/s, decay of spin coherence

    void validate() const;
    bool is_zero() const
    {
        return heating_rate == 0.0 && motional_dephasing_rate == 0.0
               && spin_dephasing_rate == 0.0;
    }
};

//! Which Hilbert space an operator lives on.
enum class Space
{
    motion,      //!< n_max
    spin_motion  //!< 2 n_max, [down | up]
};

//! Lindblad jump operators: heating as equal-rate a and a^dag channels,
//! motional dephasing as sqrt(2 gamma_m) n, spin dephasing as
//! sqrt(gamma_s / 2) sigma_z.
std::vector<OperatorMatrix>
jump_operators(DecoherenceSpec const& spec, int n_max, Space space);

//! Largest Hilbert dimension accepted by the dense master equation.
inline constexpr int kMaxMasterEquationDim = 128;

//! Lindblad master equation, integrated with RK4 in the interaction picture
//! of H so that zero rates reproduce the unitary exactly. Throws
//! NumericError when the dimension exceeds kMaxMasterEquationDim or the
//! result leaves the positive cone by more than 1e-8.
DensityMatrix evolve_master_equation(DensityMatrix const& rho,
                                     OperatorMatrix const& h,
                                     DecoherenceSpec const& spec,
                                     double t,
                                     Space space);

struct TrajectoryAverage
{
    std::vector<double> fock_mean;  //!< motional populations (spin traced out)
    std::vector<double> fock_sem;
    double spin_down_mean = 0.0;    //!< only meaningful for Space::spin_motion
    double spin_down_sem = 0.0;
    int n_traj = 0;
    int total_jumps = 0;
    //! final motional populations per trajectory (n_traj x n_max)
    std::vector<std::vector<double>> per_trajectory;
    //! normalized final states, filled only when requested
    std::vector<Eigen::VectorXcd> final_states;
};

//! Monte-Carlo wavefunction unraveling of the same Lindbladian. Jump times
//! are solved exactly from the norm decay of the non-Hermitian evolution.
//! Trajectory k draws from Philox(seed, k), so results do not depend on the
//! thread count.
TrajectoryAverage mcwf_trajectories(Eigen::VectorXcd const& psi0,
                                    OperatorMatrix const& h,
                                    DecoherenceSpec const& spec,
                                    double t,
                                    int n_traj,
                                    std::uint64_t seed,
                                    Space space,
                                    bool keep_states = false);

//! Motional populations of a density matrix (spin traced out if present).
std::vector<double> fock_populations(DensityMatrix const& rho, Space space);

//! Reduced motional density matrix.
DensityMatrix motional_state(DensityMatrix const& rho, Space space);

}  // namespace fockcat
