#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fockcat/fit.hpp"
#include "fockcat/oscillator.hpp"
#include "fockcat/synth.hpp"

namespace fockcat
{
struct WignerPoint
{
    cplx point{0.0, 0.0};  //!< phase-space point the value belongs to
    double w = 0.0;
    double sem = 0.0;
    bool valid = true;  //!< false marks a hole left by a failed fit
};

enum class WignerSource
{
    simulated,  //!< exact populations of the state in each probe basis
    fitted,     //!< synthesized noisy traces refit point by point
    oracle      //!< direct evaluation, no populations involved
};

std::string to_string(WignerSource source);
WignerSource wigner_source_from_string(std::string const& name);

struct WignerGrid
{
    std::vector<WignerPoint> points;
    WignerSource source = WignerSource::oracle;
    //! Raster shape when the points form a grid (row-major in Im, then Re).
    int n_re = 0;
    int n_im = 0;
    //! One message per hole, "index: reason".
    std::vector<std::string> failures;
};

//! W = (2/pi) sum (-1)^n p[n] at the effective point of a displaced basis.
//! sem is propagated from independent per-level errors when given.
WignerPoint wigner_point_from_populations(PopulationVector const& pops,
                                          std::vector<double> const& sem = {});

//! Same, using the bootstrap parity error of a fit.
WignerPoint wigner_point_from_estimate(PopulationEstimate const& est);

//! (2/pi) sum (-1)^n |<n|D(-point)|psi>|^2
double wigner_oracle(FockVector const& state, cplx point);
double wigner_oracle(DensityMatrix const& rho, cplx point);

//! Closed-form Wigner function of (|alpha> +- |-alpha>), normalized.
double cat_wigner(cplx alpha, CatParity parity, cplx point);

//! Displacement that makes S(r e^{i phi_s}) D(beta) probe the given point.
cplx basis_beta_for_point(cplx point, double r, double phi_s);

//! Rectangular grid of target points, Re and Im both inclusive.
struct GridSpec
{
    double re_min = 0.0;
    double re_max = 0.0;
    int n_re = 1;
    double im_min = 0.0;
    double im_max = 0.0;
    int n_im = 1;

    void validate() const;
    std::vector<cplx> points() const;
};

struct ReconstructionConfig
{
    WignerSource source = WignerSource::oracle;
    //! Squeeze of the probe basis; zero gives plain displaced bases.
    double r = 0.0;
    double phi_s = 0.0;

    // fitted source only
    double omega_probe = 2.0 * kPi * 31e3;
    double eta = 0.0;
    //! Empty selects a per-point window past the mixture revival.
    std::vector<double> times;
    int shots = 250;
    //! Decay used to synthesize traces; the fit holds gamma frozen at it.
    DecayModel decay;
    bool float_omega = false;
    int bootstrap = 100;
    int n_levels = 0;
    std::uint64_t seed = 1;

    void validate() const;
};

/*!
 * Wigner values on a set of target points.
 *
 * Each point is independent. In the fitted mode a point whose fit throws is
 * kept as a hole (valid = false) and recorded in failures.
 */
WignerGrid reconstruct_points(FockVector const& state,
                              std::vector<cplx> const& points,
                              ReconstructionConfig const& config);
WignerGrid reconstruct_points(DensityMatrix const& rho,
                              std::vector<cplx> const& points,
                              ReconstructionConfig const& config);

WignerGrid reconstruct_grid(FockVector const& state,
                            GridSpec const& grid,
                            ReconstructionConfig const& config);
WignerGrid reconstruct_grid(DensityMatrix const& rho,
                            GridSpec const& grid,
                            ReconstructionConfig const& config);

/*!
 * f(x) = (2/pi) A exp(-2 x^2) cos(4 alpha x), x = Im(point).
 *
 * A is signed: odd cats give A < 0. Report magnitude() for comparisons with
 * unsigned fringe contrasts.
 */
struct FringeFit
{
    double a = 0.0;
    double a_err = 0.0;
    double alpha = 0.0;
    double alpha_err = 0.0;
    double residual_rms = 0.0;
    //! Sampling is coarser than four points per fringe period pi/(2 alpha).
    bool aliased = false;

    double magnitude() const { return a < 0.0 ? -a : a; }
};

//! Least-squares fringe fit of an Im-axis cut; alpha is searched within
//! [0.5, 1.5] alpha_guess. Holes are skipped.
FringeFit fringe_fit(WignerGrid const& cut, double alpha_guess);

std::string fringe_report(FringeFit const& fit);

}  // namespace fockcat
