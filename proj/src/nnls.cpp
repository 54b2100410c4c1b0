#include "fockcat/nnls.hpp"

#include <cmath>
#include <vector>

#include "fockcat/errors.hpp"

namespace fockcat
{
namespace
{
Eigen::VectorXd
solve_passive(Eigen::MatrixXd const& a,
              Eigen::VectorXd const& b,
              std::vector<int> const& passive)
{
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t j = 0; j < passive.size(); ++j)
        ap.col(static_cast<Eigen::Index>(j)) = a.col(passive[j]);
    return ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(Eigen::MatrixXd const& a, Eigen::VectorXd const& b)
{
    auto const n = a.cols();
    if (a.rows() != b.size())
        throw ValidationError("nnls: dimension mismatch");
    NnlsResult res;
    res.x = Eigen::VectorXd::Zero(n);
    if (n == 0)
    {
        res.residual_norm = b.norm();
        return res;
    }

    Eigen::MatrixXd g = a.transpose() * a;
    Eigen::VectorXd c = a.transpose() * b;
    double const tol = 1e-12 * std::max(1.0, g.diagonal().maxCoeff())
                       * std::max(1.0, std::sqrt(c.squaredNorm()));

    std::vector<bool> in_p(static_cast<std::size_t>(n), false);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    int const max_iter = static_cast<int>(3 * n + 30);

    auto solve_gram = [&](std::vector<int> const& p)
    {
        auto k = static_cast<Eigen::Index>(p.size());
        Eigen::MatrixXd gp(k, k);
        Eigen::VectorXd cp(k);
        for (Eigen::Index i = 0; i < k; ++i)
        {
            cp[i] = c[p[static_cast<std::size_t>(i)]];
            for (Eigen::Index j = 0; j < k; ++j)
                gp(i, j) = g(p[static_cast<std::size_t>(i)],
                             p[static_cast<std::size_t>(j)]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gp);
        Eigen::VectorXd z = ldlt.solve(cp);
        if (ldlt.info() != Eigen::Success || !z.allFinite())
            z = gp.completeOrthogonalDecomposition().solve(cp);
        return z;
    };

    int iter = 0;
    while (true)
    {
        Eigen::VectorXd w = c - g * x;
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (!in_p[static_cast<std::size_t>(j)] && w[j] > wmax)
            {
                wmax = w[j];
                best = j;
            }
        }
        if (best < 0)
            break;
        if (++iter > max_iter)
        {
            res.converged = false;
            break;
        }
        in_p[static_cast<std::size_t>(best)] = true;

        while (true)
        {
            std::vector<int> p;
            for (Eigen::Index j = 0; j < n; ++j)
                if (in_p[static_cast<std::size_t>(j)])
                    p.push_back(static_cast<int>(j));
            Eigen::VectorXd z = solve_gram(p);
            bool feasible = true;
            for (Eigen::Index i = 0; i < z.size(); ++i)
                feasible = feasible && z[i] > 0.0;
            if (feasible)
            {
                x.setZero();
                for (std::size_t i = 0; i < p.size(); ++i)
                    x[p[i]] = z[static_cast<Eigen::Index>(i)];
                break;
            }
            double step = 1.0;
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                double zi = z[static_cast<Eigen::Index>(i)];
                if (zi <= 0.0)
                {
                    double xi = x[p[i]];
                    step = std::min(step, xi / (xi - zi));
                }
            }
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                double& xi = x[p[i]];
                xi += step * (z[static_cast<Eigen::Index>(i)] - xi);
                if (xi <= 1e-15)
                {
                    xi = 0.0;
                    in_p[static_cast<std::size_t>(p[i])] = false;
                }
            }
            if (++iter > max_iter)
            {
                res.converged = false;
                break;
            }
        }
        if (!res.converged)
            break;
    }

    // polish the passive set with QR on A
    std::vector<int> p;
    for (Eigen::Index j = 0; j < n; ++j)
        if (in_p[static_cast<std::size_t>(j)] && x[j] > 0.0)
            p.push_back(static_cast<int>(j));
    if (!p.empty())
    {
        Eigen::VectorXd z = solve_passive(a, b, p);
        if ((z.array() > 0.0).all())
        {
            x.setZero();
            for (std::size_t i = 0; i < p.size(); ++i)
                x[p[i]] = z[static_cast<Eigen::Index>(i)];
        }
    }
    res.x = x;
    res.iterations = iter;
    res.residual_norm = (a * x - b).norm();
    return res;
}

namespace
{
// min ||A x - b|| over the simplex sum(x) = 1, x >= 0, by a primal active
// set on the normal equations.
NnlsResult nnls_unit_sum(Eigen::MatrixXd const& a, Eigen::VectorXd const& b)
{
    auto const n = a.cols();
    NnlsResult res;
    Eigen::MatrixXd g = a.transpose() * a;
    Eigen::VectorXd c = a.transpose() * b;
    double const tol = 1e-12 * std::max(1.0, g.diagonal().maxCoeff());

    Eigen::Index j0 = 0;
    (g.diagonal() - 2.0 * c).minCoeff(&j0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x[j0] = 1.0;
    std::vector<bool> in_p(static_cast<std::size_t>(n), false);
    in_p[static_cast<std::size_t>(j0)] = true;

    auto passive = [&]
    {
        std::vector<int> p;
        for (Eigen::Index j = 0; j < n; ++j)
            if (in_p[static_cast<std::size_t>(j)])
                p.push_back(static_cast<int>(j));
        return p;
    };
    // equality-constrained solve on the passive set; returns (z, mu)
    auto solve = [&](std::vector<int> const& p, double& mu)
    {
        auto k = static_cast<Eigen::Index>(p.size());
        Eigen::MatrixXd gp(k, k);
        Eigen::VectorXd cp(k);
        for (Eigen::Index i = 0; i < k; ++i)
        {
            cp[i] = c[p[static_cast<std::size_t>(i)]];
            for (Eigen::Index j = 0; j < k; ++j)
                gp(i, j) = g(p[static_cast<std::size_t>(i)],
                             p[static_cast<std::size_t>(j)]);
        }
        auto dec = gp.completeOrthogonalDecomposition();
        Eigen::VectorXd gc = dec.solve(cp);
        Eigen::VectorXd g1 = dec.solve(Eigen::VectorXd::Ones(k));
        mu = (gc.sum() - 1.0) / g1.sum();
        return Eigen::VectorXd(gc - mu * g1);
    };

    int const max_iter = static_cast<int>(3 * n + 30);
    int iter = 0;
    double mu = 0.0;
    while (iter++ < max_iter)
    {
        auto p = passive();
        Eigen::VectorXd z = solve(p, mu);
        if ((z.array() > 0.0).all())
        {
            x.setZero();
            for (std::size_t i = 0; i < p.size(); ++i)
                x[p[i]] = z[static_cast<Eigen::Index>(i)];
            Eigen::VectorXd w = c - g * x - mu * Eigen::VectorXd::Ones(n);
            Eigen::Index best = -1;
            double wmax = tol;
            for (Eigen::Index j = 0; j < n; ++j)
            {
                if (!in_p[static_cast<std::size_t>(j)] && w[j] > wmax)
                {
                    wmax = w[j];
                    best = j;
                }
            }
            if (best < 0)
                break;
            in_p[static_cast<std::size_t>(best)] = true;
            continue;
        }
        double step = 1.0;
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            double zi = z[static_cast<Eigen::Index>(i)];
            if (zi <= 0.0)
                step = std::min(step, x[p[i]] / (x[p[i]] - zi));
        }
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            double& xi = x[p[i]];
            xi += step * (z[static_cast<Eigen::Index>(i)] - xi);
            if (xi <= 1e-15)
            {
                xi = 0.0;
                in_p[static_cast<std::size_t>(p[i])] = false;
            }
        }
        double s = x.sum();
        if (s > 0.0)
            x /= s;
    }
    res.converged = iter <= max_iter;

    // polish: eliminate the last passive variable and solve by QR on A
    auto p = passive();
    if (p.size() > 1)
    {
        auto k = static_cast<Eigen::Index>(p.size());
        Eigen::VectorXd last = a.col(p.back());
        Eigen::MatrixXd m(a.rows(), k - 1);
        for (Eigen::Index i = 0; i + 1 < k; ++i)
            m.col(i) = a.col(p[static_cast<std::size_t>(i)]) - last;
        Eigen::VectorXd y = m.colPivHouseholderQr().solve(b - last);
        double rest = 1.0 - y.sum();
        if ((y.array() > 0.0).all() && rest > 0.0)
        {
            x.setZero();
            for (Eigen::Index i = 0; i + 1 < k; ++i)
                x[p[static_cast<std::size_t>(i)]] = y[i];
            x[p.back()] = rest;
        }
    }
    res.x = x;
    res.iterations = iter;
    res.residual_norm = (a * x - b).norm();
    return res;
}
}  // namespace

NnlsResult nnls_simplex(Eigen::MatrixXd const& a,
                        Eigen::VectorXd const& b,
                        bool strict)
{
    if (a.rows() != b.size())
        throw ValidationError("nnls_simplex: dimension mismatch");
    if (a.cols() == 0)
        throw ValidationError("nnls_simplex: no columns");
    if (!strict)
    {
        NnlsResult r = nnls(a, b);
        if (r.x.sum() <= 1.0 + 1e-12)
            return r;
        // otherwise the sum bound is active at the optimum of this convex
        // problem and the equality solution is the answer
    }
    return nnls_unit_sum(a, b);
}

}  // namespace fockcat
