#pragma once

#include <vector>

namespace fockcat
{
//! ln(n!) evaluated through lgamma.
double log_factorial(int n);

//---------------------------------------------------------------------------//
/*!
 * A real value stored as sign * exp(log_abs).
 *
 * Matrix elements of displacement and squeeze operators combine factorial
 * ratios and polynomial values that individually overflow a double long
 * before the products do.
 */
struct LogScaled
{
    double log_abs = -1e300;
    int sign = 0;

    double value() const;
};

//! Generalized Laguerre polynomials L_n^{(k)}(x) for n = 0..n_count-1, each
//! returned in log-scaled form. Uses the three-term recurrence in n with
//! periodic rescaling.
std::vector<LogScaled> laguerre_column(int n_count, int k, double x);

//! Jacobi polynomials P_n^{(a,b)}(x) for n = 0..n_count-1 in log-scaled
//! form, by forward recurrence in n (stable for x in [-1, 1]).
std::vector<LogScaled>
jacobi_column(int n_count, double a, double b, double x);

}  // namespace fockcat
