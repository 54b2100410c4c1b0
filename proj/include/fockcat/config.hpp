#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fockcat/fit.hpp"
#include "fockcat/synth.hpp"
#include "fockcat/wigner.hpp"

namespace fockcat
{
inline constexpr int kSchemaVersion = 1;

//! Motional state named in a config.
enum class StateKind
{
    odd,       //!< |psi_->
    even,      //!< |psi_+>
    mixture,   //!< (|a><a| + |-a><-a|)/2
    coherent,  //!< |alpha>
    fock       //!< |n>, n = fock_level
};

std::string to_string(StateKind kind);
StateKind state_kind_from_string(std::string const& name);

//! One trace produced by the simulate command.
struct TraceRequest
{
    std::string name;
    StateKind state = StateKind::odd;
    ProbeSideband sideband = ProbeSideband::red;
};

/*!
 * Parsed and validated run configuration.
 *
 * Frequencies in the file are ordinary frequencies in Hz (omega / 2 pi);
 * they are stored here in rad/s. Times in the file are microseconds and are
 * stored in seconds.
 */
struct RunConfig
{
    int schema_version = kSchemaVersion;
    std::string experiment;  //!< empty: any command may use this file
    std::uint64_t seed = 1;
    std::string label;

    // physics
    cplx alpha{3.0, 0.0};
    int fock_level = 0;
    double eta = 0.0;
    double omega_sdf = 2.0 * kPi * 20e3;
    double omega_probe = 2.0 * kPi * 31e3;
    double trap_frequency = 2.0 * kPi * 2.08e6;
    DecoherenceSpec decoherence;
    int n_max = 0;

    // probe
    ProbeBasis basis;
    ProbeSideband sideband = ProbeSideband::red;
    DecayModel decay;

    // sampling
    std::vector<double> times;
    int shots = 250;
    ShotBudget budget = ShotBudget::sequences;

    // simulate / herald
    std::vector<TraceRequest> traces;
    Preparation preparation = Preparation::herald_up;
    bool detection_errors = true;
    int mcwf_trajectories = 400;
    HeraldModel herald;

    // fit
    bool fit_mixture = false;
    StateKind truth_state = StateKind::odd;  //!< used when reporting truth
    FitOptions fit;

    // wigner
    StateKind wigner_state = StateKind::odd;
    ReconstructionConfig recon;
    GridSpec grid;
    //! Motional decoherence applied to the state before reconstruction [s].
    double decohere_time = 0.0;
    std::optional<double> fringe_alpha_guess;

    // io
    std::vector<std::string> inputs;
    std::string out_dir = ".";
};

//! Parses JSON text. Unknown keys, wrong types, a missing or unsupported
//! schema_version and out-of-range values throw ValidationError.
RunConfig parse_run_config(std::string const& json_text);

//! Reads and parses a file; IoError when it cannot be read.
RunConfig load_run_config(std::string const& path);

}  // namespace fockcat
