#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fockcat/synth.hpp"

namespace fockcat
{
struct FitOptions
{
    //! Centre of the Omega search; 0 uses the trace's omega_probe.
    double omega_guess = 0.0;
    //! Relative half-width of the Omega search window.
    double omega_span = 0.10;
    std::optional<double> fixed_omega;
    std::optional<double> fixed_gamma;

    //! Lamb-Dicke parameter for the Rabi-frequency scalings.
    double eta = 0.0;
    //! Levels to fit; 0 derives them from the prior (mass > 0.999, +4).
    int n_levels = 0;
    //! Prior populations, or a Poisson prior of this mean when empty.
    std::vector<double> prior;
    double prior_mean = -1.0;

    //! Enforce sum(p) = 1 instead of sum(p) <= 1.
    bool strict_sum = false;
    ProbeSideband sideband = ProbeSideband::red;

    int grid_points = 21;
    int bootstrap = 200;
    std::uint64_t seed = 1;
};

struct PopulationEstimate
{
    std::vector<double> p;
    std::vector<double> sem;
    double omega = 0.0;
    double omega_sem = 0.0;
    double gamma = 0.0;
    double gamma_sem = 0.0;
    double parity = 0.0;  //!< sum (-1)^n p_n
    double parity_sem = 0.0;
    int n_levels = 0;
    double residual_rms = 0.0;
    ProbeBasis basis;
    DecayModel::Kind decay_kind = DecayModel::Kind::exponential;

    //! Adjacent-level frequency spacing at the mean level is below 1/t_max.
    bool ill_conditioned = false;
    //! The outer optimizer hit its iteration limit.
    bool stalled = false;
    std::vector<std::string> warnings;

    double total() const;
    double mean_level() const;
};

//! Smallest n with cumulative prior mass above 0.999, plus four guard levels.
int default_n_levels(std::vector<double> const& prior);
int default_n_levels_poisson(double mean);

/*!
 * Fits P(down, t) with freely floated populations.
 *
 * For fixed (Omega, Gamma) the model is linear in p and solved by
 * nonnegative least squares under sum(p) <= 1. The outer problem scans a
 * grid_points x grid_points grid (Omega within omega_span of the guess,
 * Gamma log-spaced relative to the trace duration) and refines the best cell
 * by Nelder-Mead. Errors come from a parametric binomial bootstrap with full
 * refits.
 */
PopulationEstimate fit_populations(SpinTrace const& trace,
                                   DecayModel::Kind decay_kind,
                                   FitOptions const& options);

struct MixtureEstimate
{
    double xi_mix = 0.0;  //!< weight of |psi_->
    double xi_sem = 0.0;
    cplx alpha_model{0.0, 0.0};
    double omega = 0.0;
    double gamma = 0.0;
    double parity = 0.0;
    double parity_sem = 0.0;
    double residual_rms = 0.0;
    //! xi p_- + (1 - xi) p_+ in the trace's basis
    PopulationVector populations;
};

//! One-parameter family xi p_- + (1 - xi) p_+ of cat populations, with the
//! same outer (Omega, Gamma) search and bootstrap as fit_populations.
MixtureEstimate fit_mixture(SpinTrace const& trace,
                            cplx alpha_model,
                            DecayModel::Kind decay_kind,
                            FitOptions const& options);

//! "parity = -0.880 +/- 0.040 (n_levels = 25, omega/2pi = 31.00 kHz, ...)"
//! Throws ValidationError for an empty estimate.
std::string parity_report(PopulationEstimate const& est);
std::string parity_report(MixtureEstimate const& est);

}  // namespace fockcat
