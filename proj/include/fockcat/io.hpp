#pragma once

#include <string>
#include <vector>

#include "fockcat/fit.hpp"
#include "fockcat/oscillator.hpp"
#include "fockcat/synth.hpp"
#include "fockcat/wigner.hpp"

namespace fockcat
{
// All writers throw IoError when the file cannot be written; readers throw
// IoError for missing files and ValidationError for malformed content.

//! n,re,im
void write_fock_csv(std::string const& path, FockVector const& state);
FockVector read_fock_csv(std::string const& path);

//! row,col,re,im for every nonzero element
void write_operator_csv(std::string const& path, OperatorMatrix const& op);
OperatorMatrix read_operator_csv(std::string const& path);

/*!
 * Spin trace with "#"-prefixed header lines carrying the probe basis and
 * Rabi rate:
 *
 *   # basis = displaced_squeezed
 *   # beta_re = 0.5
 *   # ...
 *   # omega_probe_rad_s = 194778.7
 *   t_us,p_down,shots
 */
void write_spin_trace(std::string const& path, SpinTrace const& trace);
SpinTrace read_spin_trace(std::string const& path);

//! n,p,sem
void write_populations_csv(std::string const& path,
                           std::vector<double> const& p,
                           std::vector<double> const& sem = {});

//! "key = value" summary of a fit, units in the key names.
std::string estimate_summary(PopulationEstimate const& est);
std::string estimate_summary(MixtureEstimate const& est);

//! re_beta,im_beta,W,sem,valid
void write_wigner_csv(std::string const& path, WignerGrid const& grid);

/*!
 * Plain (P2) PGM rendering of a rectangular grid: W = -2/pi maps to 0,
 * W = +2/pi to 255, holes to 0. The top row is the largest Im(beta).
 */
void write_wigner_pgm(std::string const& path, WignerGrid const& grid);

void write_text(std::string const& path, std::string const& text);

}  // namespace fockcat
