#include "fockcat/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "fockcat/errors.hpp"
#include "fockcat/nnls.hpp"

namespace fockcat
{
namespace
{
constexpr std::uint64_t kBootstrapDomain = 0x626f6f74ull;  // "boot"
constexpr double kLogGammaLo = -6.907755278982137;         // ln 1e-3
constexpr double kLogGammaHi = 1.6094379124341003;         // ln 5
constexpr double kLogGammaMin = -9.210340371976184;        // ln 1e-4
constexpr double kLogGammaMax = 2.995732273553991;         // ln 20
constexpr int kMaxEvaluations = 600;

double sample_sem(std::vector<double> const& xs)
{
    if (xs.size() < 2)
        return 0.0;
    double m = 0.0;
    for (double x : xs)
        m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs)
        v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

// Shared data of one fit: weighted rows, Rabi scalings and the natural
// scales that make the search independent of the time unit.
struct Problem
{
    std::vector<double> t;
    std::vector<double> sqrt_w;
    std::vector<int> shots;
    std::vector<double> scalings;
    DecayModel::Kind kind;
    ProbeSideband sideband;
    double t_max;
    double omega0;
    double gamma_scale;
    std::optional<double> fixed_omega;
    std::optional<double> fixed_gamma;
    double omega_span;
    int grid_points;

    int levels() const { return static_cast<int>(scalings.size()); }

    // Columns 1/2 (1 - gamma_n(t) cos(Omega s_n t / 2)), rows scaled by sqrt(w).
    Eigen::MatrixXd design(double omega, double gamma) const
    {
        DecayModel d{kind, gamma};
        Eigen::MatrixXd a(static_cast<Eigen::Index>(t.size()), levels());
        for (std::size_t i = 0; i < t.size(); ++i)
            for (int n = 0; n < levels(); ++n)
                a(static_cast<Eigen::Index>(i), n)
                    = sqrt_w[i] * 0.5
                      * (1.0
                         - d.factor(t[i], n)
                               * std::cos(0.5 * omega
                                          * scalings[static_cast<std::size_t>(n)]
                                          * t[i]));
        return a;
    }

    // Red-sideband-equivalent targets (blue traces are mirrored), weighted.
    Eigen::VectorXd target(std::vector<double> const& y) const
    {
        Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
        for (std::size_t i = 0; i < y.size(); ++i)
        {
            double v = sideband == ProbeSideband::red ? y[i] : 1.0 - y[i];
            b[static_cast<Eigen::Index>(i)] = sqrt_w[i] * v;
        }
        return b;
    }

    double to_omega(double u) const { return omega0 * u; }
    double to_gamma(double v) const { return gamma_scale * std::exp(v); }
};

struct Outer
{
    double omega;
    double gamma;
    double ssr;
    bool stalled;
};

using Objective = std::function<double(double omega, double gamma)>;

// Nelder-Mead on the free coordinates of (u, v) = (Omega/Omega0, ln Gamma').
Outer nelder_mead(Problem const& pr,
                  Objective const& f,
                  double u0,
                  double v0,
                  double du,
                  double dv)
{
    bool free_u = !pr.fixed_omega.has_value();
    bool free_v = !pr.fixed_gamma.has_value();
    double const u_lo = 1.0 - pr.omega_span, u_hi = 1.0 + pr.omega_span;

    auto eval = [&](std::array<double, 2> const& x)
    {
        double u = free_u ? x[0] : u0;
        double v = free_v ? x[free_u ? 1 : 0] : v0;
        if (free_u && (u < u_lo || u > u_hi))
            return std::numeric_limits<double>::infinity();
        if (free_v && (v < kLogGammaMin || v > kLogGammaMax))
            return std::numeric_limits<double>::infinity();
        double omega = free_u ? pr.to_omega(u) : *pr.fixed_omega;
        double gamma = free_v ? pr.to_gamma(v) : *pr.fixed_gamma;
        return f(omega, gamma);
    };
    auto finish = [&](std::array<double, 2> const& x, double val, bool stalled)
    {
        double u = free_u ? x[0] : u0;
        double v = free_v ? x[free_u ? 1 : 0] : v0;
        return Outer{free_u ? pr.to_omega(u) : *pr.fixed_omega,
                     free_v ? pr.to_gamma(v) : *pr.fixed_gamma,
                     val,
                     stalled};
    };

    int const dim = (free_u ? 1 : 0) + (free_v ? 1 : 0);
    std::array<double, 2> start{free_u ? u0 : v0, v0};
    if (dim == 0)
        return finish(start, eval(start), false);

    std::array<double, 2> const step{free_u ? du : dv, dv};
    std::array<double, 2> const tol{free_u ? 1e-10 : 1e-8, 1e-8};
    std::vector<std::array<double, 2>> x(static_cast<std::size_t>(dim + 1), start);
    std::vector<double> fx(static_cast<std::size_t>(dim + 1));
    for (int k = 0; k < dim; ++k)
        x[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(k)]
            += step[static_cast<std::size_t>(k)];
    for (std::size_t k = 0; k < x.size(); ++k)
        fx[k] = eval(x[k]);
    int evals = dim + 1;

    // The simplex stops where the objective's rounding noise hides the
    // minimum (~1e-8 in the flat Gamma direction). A parabola through three
    // points a fixed step apart locates the vertex far more precisely, which
    // keeps the answer independent of the time unit.
    auto polish = [&](std::array<double, 2> xb)
    {
        std::array<double, 2> const h{free_u ? 1e-3 * du : 1e-3 * dv, 1e-3 * dv};
        for (int round = 0; round < 2; ++round)
            for (int d = 0; d < dim; ++d)
            {
                auto k = static_cast<std::size_t>(d);
                auto lo = xb, hi = xb;
                lo[k] -= h[k];
                hi[k] += h[k];
                double f0 = eval(xb), fl = eval(lo), fh = eval(hi);
                double curv = fl - 2.0 * f0 + fh;
                if (!std::isfinite(curv) || !(curv > 0.0))
                    continue;
                double shift = 0.5 * h[k] * (fl - fh) / curv;
                if (std::abs(shift) <= h[k])
                    xb[k] += shift;
            }
        return xb;
    };

    auto order = [&]
    {
        std::vector<std::size_t> idx(x.size());
        for (std::size_t k = 0; k < idx.size(); ++k)
            idx[k] = k;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        auto xs = x;
        auto fs = fx;
        for (std::size_t k = 0; k < idx.size(); ++k)
        {
            x[k] = xs[idx[k]];
            fx[k] = fs[idx[k]];
        }
    };

    while (true)
    {
        order();
        bool small = true;
        for (std::size_t k = 1; k < x.size(); ++k)
            for (int d = 0; d < dim; ++d)
                small = small
                        && std::abs(x[k][static_cast<std::size_t>(d)]
                                    - x[0][static_cast<std::size_t>(d)])
                               < tol[static_cast<std::size_t>(d)];
        if (small)
        {
            auto best = polish(x[0]);
            return finish(best, eval(best), false);
        }
        if (evals >= kMaxEvaluations)
            return finish(x[0], fx[0], true);

        std::array<double, 2> c{0.0, 0.0};
        for (std::size_t k = 0; k + 1 < x.size(); ++k)
            for (int d = 0; d < dim; ++d)
                c[static_cast<std::size_t>(d)]
                    += x[k][static_cast<std::size_t>(d)] / dim;
        auto along = [&](double s)
        {
            std::array<double, 2> y = c;
            for (int d = 0; d < dim; ++d)
                y[static_cast<std::size_t>(d)]
                    += s * (x.back()[static_cast<std::size_t>(d)]
                            - c[static_cast<std::size_t>(d)]);
            return y;
        };
        auto xr = along(-1.0);
        double fr = eval(xr);
        ++evals;
        if (fr < fx[0])
        {
            auto xe = along(-2.0);
            double fe = eval(xe);
            ++evals;
            if (fe < fr)
            {
                x.back() = xe;
                fx.back() = fe;
            }
            else
            {
                x.back() = xr;
                fx.back() = fr;
            }
            continue;
        }
        if (fr < fx[fx.size() - 2])
        {
            x.back() = xr;
            fx.back() = fr;
            continue;
        }
        auto xc = fr < fx.back() ? along(-0.5) : along(0.5);
        double fc = eval(xc);
        ++evals;
        if (fc < std::min(fr, fx.back()))
        {
            x.back() = xc;
            fx.back() = fc;
            continue;
        }
        for (std::size_t k = 1; k < x.size(); ++k)
        {
            for (int d = 0; d < dim; ++d)
                x[k][static_cast<std::size_t>(d)]
                    = x[0][static_cast<std::size_t>(d)]
                      + 0.5
                            * (x[k][static_cast<std::size_t>(d)]
                               - x[0][static_cast<std::size_t>(d)]);
            fx[k] = eval(x[k]);
            ++evals;
        }
    }
}

double grid_du(Problem const& pr)
{
    return pr.grid_points > 1 ? 2.0 * pr.omega_span / (pr.grid_points - 1)
                              : pr.omega_span;
}

double grid_dv(Problem const& pr)
{
    return pr.grid_points > 1
               ? (kLogGammaHi - kLogGammaLo) / (pr.grid_points - 1)
               : 1.0;
}

// Grid scan followed by Nelder-Mead from the best cell.
Outer optimize(Problem const& pr, Objective const& f)
{
    int const g = std::max(1, pr.grid_points);
    std::vector<double> us, vs;
    if (pr.fixed_omega)
        us = {1.0};
    else
        for (int i = 0; i < g; ++i)
            us.push_back(g > 1 ? 1.0 - pr.omega_span + i * grid_du(pr) : 1.0);
    if (pr.fixed_gamma)
        vs = {0.0};
    else
        for (int j = 0; j < g; ++j)
            vs.push_back(g > 1 ? kLogGammaLo + j * grid_dv(pr) : 0.0);

    std::vector<double> vals(us.size() * vs.size());
    auto const cells = static_cast<std::int64_t>(vals.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < cells; ++c)
    {
        auto i = static_cast<std::size_t>(c) / vs.size();
        auto j = static_cast<std::size_t>(c) % vs.size();
        double omega = pr.fixed_omega ? *pr.fixed_omega : pr.to_omega(us[i]);
        double gamma = pr.fixed_gamma ? *pr.fixed_gamma : pr.to_gamma(vs[j]);
        vals[static_cast<std::size_t>(c)] = f(omega, gamma);
    }
    auto best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    double u0 = us[best / vs.size()];
    double v0 = vs[best % vs.size()];
    if (!std::isfinite(vals[best]))
        throw NumericError("fit: objective is not finite anywhere on the grid");
    return nelder_mead(pr, f, u0, v0, 0.5 * grid_du(pr), 0.5 * grid_dv(pr));
}

Outer refine(Problem const& pr, Objective const& f, Outer const& from)
{
    double u0 = from.omega / pr.omega0;
    double v0 = from.gamma > 0.0 ? std::log(from.gamma / pr.gamma_scale)
                                 : kLogGammaMin;
    v0 = std::clamp(v0, kLogGammaMin, kLogGammaMax);
    return nelder_mead(pr, f, u0, v0, 0.25 * grid_du(pr), 0.25 * grid_dv(pr));
}

Problem make_problem(SpinTrace const& trace,
                     DecayModel::Kind kind,
                     FitOptions const& opt,
                     int levels)
{
    trace.validate();
    if (opt.omega_span <= 0.0 || opt.omega_span >= 1.0)
        throw ValidationError("fit: omega_span must be in (0, 1)");
    if (opt.grid_points < 1)
        throw ValidationError("fit: grid_points must be >= 1");
    if (opt.bootstrap < 0)
        throw ValidationError("fit: bootstrap must be >= 0");
    if (opt.fixed_gamma && !(*opt.fixed_gamma >= 0.0))
        throw ValidationError("fit: fixed gamma must be >= 0");
    if (opt.fixed_omega && !(*opt.fixed_omega > 0.0))
        throw ValidationError("fit: fixed omega must be > 0");

    Problem pr;
    pr.t = trace.times;
    pr.shots = trace.shots;
    for (int s : trace.shots)
        pr.sqrt_w.push_back(std::sqrt(static_cast<double>(s)));
    pr.kind = kind;
    pr.sideband = opt.sideband;
    pr.t_max = trace.max_time();
    if (!(pr.t_max > 0.0))
        throw ValidationError("fit: trace must extend beyond t = 0");
    pr.omega0 = opt.fixed_omega ? *opt.fixed_omega
                : opt.omega_guess > 0.0 ? opt.omega_guess
                                        : trace.omega_probe;
    if (!(pr.omega0 > 0.0))
        throw ValidationError("fit: an Omega guess (or trace omega) is required");
    switch (kind)
    {
        case DecayModel::Kind::exponential:
            pr.gamma_scale = 1.0 / pr.t_max;
            break;
        case DecayModel::Kind::gaussian:
            pr.gamma_scale = 1.0 / (pr.t_max * pr.t_max);
            break;
        case DecayModel::Kind::gaussian_level_scaled:
            pr.gamma_scale = 2.0 / (pr.t_max * pr.t_max * levels);
            break;
    }
    pr.fixed_omega = opt.fixed_omega;
    pr.fixed_gamma = opt.fixed_gamma;
    pr.omega_span = opt.omega_span;
    pr.grid_points = opt.grid_points;
    pr.scalings = rabi_frequencies(trace.basis, 1.0, opt.eta, levels);
    return pr;
}

std::vector<double> resample(SpinTrace const& trace,
                             std::vector<double> const& model,
                             std::uint64_t seed,
                             std::size_t b)
{
    Philox4x32 rng(seed, substream(kBootstrapDomain, b));
    std::vector<double> y(model.size());
    for (std::size_t i = 0; i < model.size(); ++i)
    {
        std::binomial_distribution<int> dist(trace.shots[i],
                                             std::clamp(model[i], 0.0, 1.0));
        y[i] = static_cast<double>(dist(rng)) / trace.shots[i];
    }
    return y;
}

// Unweighted model values (in the trace's sideband) from a weighted design.
std::vector<double> model_values(Problem const& pr,
                                 Eigen::MatrixXd const& aw,
                                 Eigen::VectorXd const& p)
{
    Eigen::VectorXd m = aw * p;
    std::vector<double> out(pr.t.size());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        double v = m[static_cast<Eigen::Index>(i)] / pr.sqrt_w[i];
        out[i] = pr.sideband == ProbeSideband::red ? v : 1.0 - v;
    }
    return out;
}

double rms(std::vector<double> const& a, std::vector<double> const& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

double alternating_sum(std::vector<double> const& p)
{
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        s += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
    return s;
}

}  // namespace

//---------------------------------------------------------------------------//

double PopulationEstimate::total() const
{
    double s = 0.0;
    for (double x : p)
        s += x;
    return s;
}

double PopulationEstimate::mean_level() const
{
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        s += static_cast<double>(n) * p[n];
    double tot = total();
    return tot > 0.0 ? s / tot : 0.0;
}

int default_n_levels(std::vector<double> const& prior)
{
    double cum = 0.0;
    for (std::size_t n = 0; n < prior.size(); ++n)
    {
        cum += prior[n];
        if (cum > 0.999)
            return static_cast<int>(n) + 1 + 4;
    }
    throw ValidationError("default_n_levels: prior never reaches 0.999 mass");
}

int default_n_levels_poisson(double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw ValidationError("default_n_levels_poisson: mean must be >= 0");
    double term = std::exp(-mean);
    double cum = term;
    int n = 0;
    while (cum <= 0.999)
    {
        ++n;
        term *= mean / n;
        cum += term;
    }
    return n + 1 + 4;
}

PopulationEstimate fit_populations(SpinTrace const& trace,
                                   DecayModel::Kind decay_kind,
                                   FitOptions const& opt)
{
    int levels = opt.n_levels;
    if (levels <= 0)
    {
        if (!opt.prior.empty())
            levels = default_n_levels(opt.prior);
        else if (opt.prior_mean >= 0.0)
            levels = default_n_levels_poisson(opt.prior_mean);
        else
            throw ValidationError(
                "fit_populations: n_levels or a prior is required");
    }
    if (trace.size() < static_cast<std::size_t>(3 * levels))
        throw ValidationError("fit_populations: need at least 3 time points per "
                              "fitted level ("
                              + std::to_string(3 * levels) + ")");
    Problem pr = make_problem(trace, decay_kind, opt, levels);

    auto solve = [&](double omega, double gamma, Eigen::VectorXd const& b)
    {
        Eigen::MatrixXd a = pr.design(omega, gamma);
        return nnls_simplex(a, b, opt.strict_sum);
    };
    Eigen::VectorXd b0 = pr.target(trace.p_down);
    Objective f0 = [&](double omega, double gamma)
    {
        double r = solve(omega, gamma, b0).residual_norm;
        return r * r;
    };
    Outer best = optimize(pr, f0);

    PopulationEstimate est;
    est.basis = trace.basis;
    est.decay_kind = decay_kind;
    est.n_levels = levels;
    est.omega = best.omega;
    est.gamma = best.gamma;
    est.stalled = best.stalled;
    Eigen::MatrixXd aw = pr.design(best.omega, best.gamma);
    NnlsResult sol = nnls_simplex(aw, b0, opt.strict_sum);
    est.p.assign(sol.x.data(), sol.x.data() + sol.x.size());
    est.parity = alternating_sum(est.p);
    std::vector<double> fitted = model_values(pr, aw, sol.x);
    est.residual_rms = rms(fitted, trace.p_down);

    // parametric bootstrap with full refits
    int const nb = opt.bootstrap;
    std::vector<std::vector<double>> boot_p(static_cast<std::size_t>(nb));
    std::vector<double> boot_omega(static_cast<std::size_t>(nb)),
        boot_gamma(static_cast<std::size_t>(nb)),
        boot_parity(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nb; ++k)
    {
        auto kk = static_cast<std::size_t>(k);
        Eigen::VectorXd bk = pr.target(resample(trace, fitted, opt.seed, kk));
        Objective fk = [&](double omega, double gamma)
        {
            double r = solve(omega, gamma, bk).residual_norm;
            return r * r;
        };
        Outer o = refine(pr, fk, best);
        Eigen::VectorXd pk = solve(o.omega, o.gamma, bk).x;
        boot_p[kk].assign(pk.data(), pk.data() + pk.size());
        boot_omega[kk] = o.omega;
        boot_gamma[kk] = o.gamma;
        boot_parity[kk] = alternating_sum(boot_p[kk]);
    }
    est.sem.assign(static_cast<std::size_t>(levels), 0.0);
    if (nb >= 2)
    {
        for (int n = 0; n < levels; ++n)
        {
            std::vector<double> col(static_cast<std::size_t>(nb));
            for (int k = 0; k < nb; ++k)
                col[static_cast<std::size_t>(k)]
                    = boot_p[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
            est.sem[static_cast<std::size_t>(n)] = sample_sem(col);
        }
        est.omega_sem = sample_sem(boot_omega);
        est.gamma_sem = sample_sem(boot_gamma);
        est.parity_sem = sample_sem(boot_parity);
    }

    // conditioning and coverage diagnostics at the fitted mean level
    double nbar = est.mean_level();
    auto m = static_cast<std::size_t>(std::floor(nbar));
    double spacing = 0.0;
    if (m + 1 < pr.scalings.size())
        spacing = est.omega
                  * std::abs(pr.scalings[m + 1] - pr.scalings[m]) / (4.0 * kPi);
    else
        spacing = est.omega / (4.0 * kPi) * 0.5 / std::sqrt(nbar + 1.0);
    if (spacing * pr.t_max < 1.0)
    {
        est.ill_conditioned = true;
        est.warnings.push_back(
            "ill-conditioned: adjacent-level frequency spacing at the mean level ("
            + std::to_string(spacing) + " Hz) is below 1/t_max ("
            + std::to_string(1.0 / pr.t_max) + " Hz)");
    }
    double t_mix = revival_times(nbar, est.omega).t_mix;
    if (pr.t_max < t_mix)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "trace ends at %.1f us, before the mixture revival at "
                      "%.1f us; populations are likely overestimated",
                      pr.t_max * 1e6, t_mix * 1e6);
        est.warnings.emplace_back(buf);
    }
    if (est.stalled)
        est.warnings.emplace_back("outer optimizer stopped at its evaluation limit");
    return est;
}

MixtureEstimate fit_mixture(SpinTrace const& trace,
                            cplx alpha_model,
                            DecayModel::Kind decay_kind,
                            FitOptions const& opt)
{
    if (std::abs(alpha_model) == 0.0)
        throw ValidationError("fit_mixture: alpha_model must be nonzero");
    int n_state = default_n_max(alpha_model);
    auto pm = populations_in_basis(cat_state(alpha_model, CatParity::odd, n_state),
                                   trace.basis).p;
    auto pp = populations_in_basis(cat_state(alpha_model, CatParity::even, n_state),
                                   trace.basis).p;
    std::size_t len = std::max(pm.size(), pp.size());
    pm.resize(len, 0.0);
    pp.resize(len, 0.0);
    Problem pr = make_problem(trace, decay_kind, opt, static_cast<int>(len));
    Eigen::Map<Eigen::VectorXd const> vm(pm.data(), static_cast<Eigen::Index>(len));
    Eigen::Map<Eigen::VectorXd const> vp(pp.data(), static_cast<Eigen::Index>(len));

    struct Inner
    {
        double xi;
        double ssr;
    };
    auto solve = [&](double omega, double gamma, Eigen::VectorXd const& b)
    {
        Eigen::MatrixXd a = pr.design(omega, gamma);
        Eigen::VectorXd c0 = a * vp;
        Eigen::VectorXd c1 = a * (vm - vp);
        double den = c1.squaredNorm();
        double xi = den > 0.0 ? c1.dot(b - c0) / den : 0.5;
        xi = std::clamp(xi, 0.0, 1.0);
        return Inner{xi, (c0 + xi * c1 - b).squaredNorm()};
    };
    Eigen::VectorXd b0 = pr.target(trace.p_down);
    Objective f0 = [&](double omega, double gamma)
    { return solve(omega, gamma, b0).ssr; };
    Outer best = optimize(pr, f0);
    Inner sol = solve(best.omega, best.gamma, b0);

    MixtureEstimate est;
    est.alpha_model = alpha_model;
    est.xi_mix = sol.xi;
    est.omega = best.omega;
    est.gamma = best.gamma;
    double par_m = alternating_sum(pm), par_p = alternating_sum(pp);
    est.parity = sol.xi * par_m + (1.0 - sol.xi) * par_p;
    est.populations.basis = trace.basis;
    est.populations.p.resize(len);
    for (std::size_t n = 0; n < len; ++n)
        est.populations.p[n] = sol.xi * pm[n] + (1.0 - sol.xi) * pp[n];
    Eigen::MatrixXd aw = pr.design(best.omega, best.gamma);
    Eigen::Map<Eigen::VectorXd const> pv(est.populations.p.data(),
                                         static_cast<Eigen::Index>(len));
    std::vector<double> fitted = model_values(pr, aw, pv);
    est.residual_rms = rms(fitted, trace.p_down);

    int const nb = opt.bootstrap;
    std::vector<double> boot_xi(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < nb; ++k)
    {
        auto kk = static_cast<std::size_t>(k);
        Eigen::VectorXd bk = pr.target(resample(trace, fitted, opt.seed, kk));
        Objective fk = [&](double omega, double gamma)
        { return solve(omega, gamma, bk).ssr; };
        Outer o = refine(pr, fk, best);
        boot_xi[kk] = solve(o.omega, o.gamma, bk).xi;
    }
    est.xi_sem = sample_sem(boot_xi);
    est.parity_sem = std::abs(par_m - par_p) * est.xi_sem;
    return est;
}

std::string parity_report(PopulationEstimate const& est)
{
    if (est.p.empty())
        throw ValidationError("parity_report: empty estimate");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "parity = %+.3f +/- %.3f (basis %s, n_levels %d, "
                  "omega/2pi = %.3f kHz, gamma = %.4g, residual_rms = %.4f)",
                  est.parity, est.parity_sem, to_string(est.basis.kind).c_str(),
                  est.n_levels, est.omega / (2.0 * kPi) * 1e-3, est.gamma,
                  est.residual_rms);
    return buf;
}

std::string parity_report(MixtureEstimate const& est)
{
    if (est.populations.p.empty())
        throw ValidationError("parity_report: empty estimate");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "parity = %+.3f +/- %.3f (mixture xi = %.3f +/- %.3f, "
                  "|alpha| = %.3f, omega/2pi = %.3f kHz, gamma = %.4g)",
                  est.parity, est.parity_sem, est.xi_mix, est.xi_sem,
                  std::abs(est.alpha_model), est.omega / (2.0 * kPi) * 1e-3,
                  est.gamma);
    return buf;
}

}  // namespace fockcat
