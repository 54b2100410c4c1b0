#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fockcat/oscillator.hpp"
#include "fockcat/rng.hpp"
#include "fockcat/spin_dynamics.hpp"

namespace fockcat
{
//---------------------------------------------------------------------------//
/*!
 * Measured (or synthesized) spin population versus probe duration.
 *
 * Times are in seconds; the CSV form uses microseconds.
 */
struct SpinTrace
{
    std::vector<double> times;
    std::vector<double> p_down;
    std::vector<int> shots;
    ProbeBasis basis;
    double omega_probe = 0.0;  //!< rad/s

    std::size_t size() const { return times.size(); }
    double max_time() const;
    //! Throws ValidationError on unequal lengths, shots < 1, p outside [0,1].
    void validate() const;
};

struct DecayModel
{
    enum class Kind
    {
        exponential,           //!< exp(-gamma t)
        gaussian,              //!< exp(-gamma t^2)
        gaussian_level_scaled  //!< exp(-gamma (n+1) t^2)
    };

    Kind kind = Kind::exponential;
    double gamma = 0.0;

    void validate() const;
    double factor(double t, int n) const;
};

std::string to_string(DecayModel::Kind kind);
DecayModel::Kind decay_kind_from_string(std::string const& name);

//! Red probe gives P; the blue sideband from |down> gives 1 - P.
enum class ProbeSideband
{
    red,
    blue
};

/*!
 * P(down, t) = 1/2 sum_n p_n (1 - gamma_n(t) cos(Omega_{n,n+1} t / 2)).
 *
 * rabi must cover at least p.size() levels. Missing probability (sum p < 1)
 * contributes nothing to either spin state's population beyond 1/2 sum p.
 */
std::vector<double> trace_model(std::span<double const> p,
                                std::span<double const> rabi,
                                DecayModel const& decay,
                                std::span<double const> times,
                                ProbeSideband sideband = ProbeSideband::red);

//! Drops trailing levels whose combined mass is at most kNegligibleTailMass.
inline constexpr double kNegligibleTailMass = 1e-15;
std::vector<double> trace_model(PopulationVector const& pops,
                                double omega,
                                double eta,
                                DecayModel const& decay,
                                std::span<double const> times,
                                ProbeSideband sideband = ProbeSideband::red);

struct RevivalTimes
{
    double t_mix;  //!< 4 pi / (Omega (sqrt(n+1) - sqrt(n)))
    double t_cat;  //!< 4 pi / (Omega (sqrt(n+2) - sqrt(n)))
};

RevivalTimes revival_times(double n_bar, double omega);

//! Period of the carrier oscillation at the mean level, 4 pi / (Omega sqrt(n+1)).
double carrier_period(double n_bar, double omega);

//! Revival time of a cat state counted in carrier periods:
//! sqrt(n+1) / (sqrt(n+2) - sqrt(n)).
double revival_cycles(double n_bar);

struct RevivalPeak
{
    double time;
    double height;
};

/*!
 * Peaks of the oscillation envelope after the initial collapse.
 *
 * The envelope is |P - 1/2| averaged over one carrier period; peaks are local
 * maxima refined by quadratic interpolation, reported in time order. Samples
 * must be uniformly spaced.
 */
std::vector<RevivalPeak> find_revivals(std::span<double const> times,
                                       std::span<double const> p_down,
                                       double period);

//! Uniform grid [t0, t1] with n points.
std::vector<double> linear_times(double t0, double t1, int n);

//! Per-point binomial sampling; point i uses stream substream(seed domain, i).
SpinTrace sample_trace(std::span<double const> model,
                       std::span<double const> times,
                       std::span<int const> shots,
                       std::uint64_t seed,
                       ProbeBasis const& basis,
                       double omega_probe);

SpinTrace sample_trace(std::span<double const> model,
                       std::span<double const> times,
                       int shots,
                       std::uint64_t seed,
                       ProbeBasis const& basis,
                       double omega_probe);

//---------------------------------------------------------------------------//
// Heralding
//---------------------------------------------------------------------------//

struct HeraldModel
{
    double bright_mean = 6.8945;      //!< mean counts for |down>
    double dark_mean = 0.0063379;     //!< mean counts for |up>
    int threshold = 1;                //!< declared up iff counts <= threshold
    double detect_time = 75e-6;       //!< s

    void validate() const;
    //! Probability that a true |down> is declared up.
    double down_declared_up() const;
    //! Probability that a true |up> is declared down.
    double up_declared_down() const;

    //! Solves the two Poisson tail equations for the means at a threshold.
    static HeraldModel calibrated(double down_as_up = 0.008,
                                  double up_as_down = 2e-5,
                                  int threshold = 1);
};

struct HeraldDetection
{
    int counted_photons;
    bool declared_up;
};

HeraldDetection
herald_detection(bool spin_is_up, HeraldModel const& model, Philox4x32& rng);

HeraldDetection herald_detection(bool spin_is_up,
                                 HeraldModel const& model,
                                 std::uint64_t seed);

//---------------------------------------------------------------------------//
// Full sequence
//---------------------------------------------------------------------------//

enum class Preparation
{
    repump,          //!< rho_m = (|a><a| + |-a><-a|)/2, blue-sideband probe
    herald_up,       //!< keep the up outcome: |psi_->
    herald_up_flip   //!< carrier flip, keep up: |psi_+>
};

std::string to_string(Preparation prep);
Preparation preparation_from_string(std::string const& name);

enum class ShotBudget
{
    sequences,  //!< shots counts full sequences; accepted number is random
    accepted    //!< retry until shots accepted detections per point
};

struct SequenceConfig
{
    cplx alpha{3.0, 0.0};
    double omega_sdf = 2.0 * kPi * 20e3;  //!< rad/s; duration set by |alpha|
    Preparation preparation = Preparation::herald_up;
    HeraldModel herald;
    bool detection_errors = true;  //!< herald via the photon-count model

    ProbeBasis basis;
    double omega_probe = 2.0 * kPi * 31e3;
    double eta = 0.0;
    DecayModel decay;

    //! applied to the motional state during the herald detection window
    DecoherenceSpec decoherence;
    int mcwf_trajectories = 400;

    std::vector<double> times;
    int shots = 250;
    ShotBudget budget = ShotBudget::sequences;
    int n_max = 0;  //!< 0 selects default_n_max(alpha)

    void validate() const;
};

struct SequenceResult
{
    SpinTrace trace;
    double acceptance_rate = 1.0;
    //! populations of the delivered motional state in the probe basis
    PopulationVector true_populations;
    double true_parity = 0.0;
    //! noiseless trace of the delivered state under the same decay model
    std::vector<double> model;
    //! fraction of accepted shots whose spin was actually down
    double misherald_fraction = 0.0;
    int dropped_points = 0;
};

SequenceResult run_full_sequence(SequenceConfig const& config,
                                 std::uint64_t seed);

}  // namespace fockcat
