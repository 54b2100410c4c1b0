#pragma once

#include <Eigen/Dense>

namespace fockcat
{
struct NnlsResult
{
    Eigen::VectorXd x;
    double residual_norm = 0.0;  //!< ||A x - b||
    int iterations = 0;
    bool converged = true;
};

//! min ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
//!
//! Active-set bookkeeping runs on the normal equations; the final passive
//! set is re-solved by column-pivoted QR on A so the answer keeps the
//! conditioning of A rather than A^T A.
NnlsResult nnls(Eigen::MatrixXd const& a, Eigen::VectorXd const& b);

//! Same problem with the additional constraint sum(x) <= 1, or sum(x) = 1
//! when strict is set.
NnlsResult nnls_simplex(Eigen::MatrixXd const& a,
                        Eigen::VectorXd const& b,
                        bool strict);

}  // namespace fockcat
