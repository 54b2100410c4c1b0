#include "fockcat/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "fockcat/errors.hpp"

namespace fockcat
{
namespace
{
constexpr double kTwoOverPi = 2.0 / kPi;
constexpr std::uint64_t kGridDomain = 0x77676964ull;  // "wgid"

int displaced_rows(int dim, cplx point)
{
    double a = std::abs(point);
    return dim + static_cast<int>(std::ceil(a * a + 8.0 * a + 30.0));
}

double alternating(Eigen::VectorXd const& p)
{
    double s = 0.0;
    for (Eigen::Index n = 0; n < p.size(); ++n)
        s += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
    return s;
}

void check_displaced(ProbeBasis const& basis, char const* who)
{
    if (!basis.has_displacement())
        throw ValidationError(std::string(who)
                              + ": populations must be in a displaced or "
                                "displaced-squeezed basis");
}

}  // namespace

std::string to_string(WignerSource source)
{
    switch (source)
    {
        case WignerSource::simulated:
            return "simulated";
        case WignerSource::fitted:
            return "fitted";
        case WignerSource::oracle:
            return "oracle";
    }
    return "oracle";
}

WignerSource wigner_source_from_string(std::string const& name)
{
    if (name == "simulated")
        return WignerSource::simulated;
    if (name == "fitted")
        return WignerSource::fitted;
    if (name == "oracle")
        return WignerSource::oracle;
    throw ValidationError("unknown Wigner source '" + name + "'");
}

WignerPoint wigner_point_from_populations(PopulationVector const& pops,
                                          std::vector<double> const& sem)
{
    check_displaced(pops.basis, "wigner_point_from_populations");
    if (!sem.empty() && sem.size() != pops.p.size())
        throw ValidationError("wigner_point_from_populations: sem length mismatch");
    WignerPoint out;
    out.point = pops.basis.effective_point();
    out.w = kTwoOverPi * parity(pops);
    double v = 0.0;
    for (double s : sem)
        v += s * s;
    out.sem = kTwoOverPi * std::sqrt(v);
    return out;
}

WignerPoint wigner_point_from_estimate(PopulationEstimate const& est)
{
    check_displaced(est.basis, "wigner_point_from_estimate");
    if (est.p.empty())
        throw ValidationError("wigner_point_from_estimate: empty estimate");
    WignerPoint out;
    out.point = est.basis.effective_point();
    out.w = kTwoOverPi * est.parity;
    out.sem = kTwoOverPi * est.parity_sem;
    return out;
}

double wigner_oracle(FockVector const& state, cplx point)
{
    int rows = displaced_rows(state.dim(), point);
    Eigen::VectorXcd shifted = displacement_block(-point, rows, state.dim())
                               * state.amps();
    Eigen::VectorXd p = shifted.cwiseAbs2();
    if (std::abs(p.sum() - 1.0) > 1e-10)
        throw TruncationError("wigner_oracle: displaced state exceeds the "
                              "working dimension");
    return kTwoOverPi * alternating(p);
}

double wigner_oracle(DensityMatrix const& rho, cplx point)
{
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        throw ValidationError("wigner_oracle: density matrix must be square");
    auto dim = static_cast<int>(rho.rows());
    OperatorMatrix d = displacement_block(-point, displaced_rows(dim, point), dim);
    // only the diagonal of D rho D^dag is needed
    OperatorMatrix dr = d * rho;
    Eigen::VectorXd p = (dr.array() * d.conjugate().array()).rowwise().sum().real();
    if (std::abs(p.sum() - rho.trace().real()) > 1e-10)
        throw TruncationError("wigner_oracle: displaced state exceeds the "
                              "working dimension");
    return kTwoOverPi * alternating(p);
}

double cat_wigner(cplx alpha, CatParity parity, cplx point)
{
    double sign = parity == CatParity::even ? 1.0 : -1.0;
    double a2 = std::norm(alpha);
    double norm = 2.0 * (1.0 + sign * std::exp(-2.0 * a2));
    if (norm <= 0.0)
        throw ValidationError("cat_wigner: odd cat needs alpha != 0");
    double direct = std::exp(-2.0 * std::norm(point - alpha))
                    + std::exp(-2.0 * std::norm(point + alpha));
    double fringe = 2.0 * std::exp(-2.0 * std::norm(point))
                    * std::cos(4.0 * std::imag(point * std::conj(alpha)));
    return kTwoOverPi * (direct + sign * fringe) / norm;
}

cplx basis_beta_for_point(cplx point, double r, double phi_s)
{
    return point * std::cosh(r)
           + std::conj(point) * std::polar(1.0, phi_s) * std::sinh(r);
}

void GridSpec::validate() const
{
    if (n_re < 1 || n_im < 1)
        throw ValidationError("grid: n_re and n_im must be >= 1");
    if (!std::isfinite(re_min) || !std::isfinite(re_max)
        || !std::isfinite(im_min) || !std::isfinite(im_max))
        throw ValidationError("grid: bounds must be finite");
    if (re_max < re_min || im_max < im_min)
        throw ValidationError("grid: max below min");
    if ((n_re > 1 && re_max == re_min) || (n_im > 1 && im_max == im_min))
        throw ValidationError("grid: repeated points on a zero-width axis");
}

std::vector<cplx> GridSpec::points() const
{
    validate();
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(n_re) * static_cast<std::size_t>(n_im));
    for (int j = 0; j < n_im; ++j)
    {
        double y = n_im > 1 ? im_min + (im_max - im_min) * j / (n_im - 1) : im_min;
        for (int i = 0; i < n_re; ++i)
        {
            double x = n_re > 1 ? re_min + (re_max - re_min) * i / (n_re - 1)
                                : re_min;
            out.emplace_back(x, y);
        }
    }
    return out;
}

void ReconstructionConfig::validate() const
{
    if (!(r >= 0.0) || r > 1.5 || !std::isfinite(phi_s))
        throw ValidationError("reconstruction: r must lie in [0, 1.5]");
    if (source != WignerSource::fitted)
        return;
    if (!(omega_probe > 0.0))
        throw ValidationError("reconstruction: omega_probe must be > 0");
    if (shots < 1)
        throw ValidationError("reconstruction: shots must be >= 1");
    if (bootstrap < 0)
        throw ValidationError("reconstruction: bootstrap must be >= 0");
    decay.validate();
}

namespace
{
template<class State>
WignerPoint fitted_point(State const& state,
                         ProbeBasis const& basis,
                         ReconstructionConfig const& cfg,
                         std::size_t index)
{
    PopulationVector truth = populations_in_basis(state, basis);
    int levels = cfg.n_levels > 0 ? cfg.n_levels : default_n_levels(truth.p);
    levels = std::max(levels, 2);

    std::vector<double> times = cfg.times;
    if (times.empty())
    {
        double nbar = std::max(truth.mean_level(), 1.0);
        double t_end = 1.2 * revival_times(nbar, cfg.omega_probe).t_mix;
        double fastest = 4.0 * kPi / (cfg.omega_probe * std::sqrt(levels));
        int n = std::max(3 * levels,
                         static_cast<int>(std::ceil(6.0 * t_end / fastest)));
        times = linear_times(0.0, t_end, n);
    }
    std::uint64_t seed = substream(kGridDomain ^ cfg.seed, index);
    auto model = trace_model(truth, cfg.omega_probe, cfg.eta, cfg.decay, times);
    SpinTrace trace = sample_trace(model, times, cfg.shots, seed, basis,
                                   cfg.omega_probe);

    FitOptions opt;
    opt.eta = cfg.eta;
    opt.n_levels = levels;
    opt.fixed_gamma = cfg.decay.gamma;
    if (!cfg.float_omega)
        opt.fixed_omega = cfg.omega_probe;
    opt.bootstrap = cfg.bootstrap;
    opt.seed = seed;
    return wigner_point_from_estimate(fit_populations(trace, cfg.decay.kind, opt));
}

template<class State>
WignerGrid reconstruct_impl(State const& state,
                            std::vector<cplx> const& points,
                            ReconstructionConfig const& cfg)
{
    cfg.validate();
    if (points.empty())
        throw ValidationError("reconstruct: no points requested");
    WignerGrid grid;
    grid.source = cfg.source;
    grid.points.resize(points.size());
    std::vector<std::string> errors(points.size());

    auto const count = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < count; ++k)
    {
        auto idx = static_cast<std::size_t>(k);
        cplx target = points[idx];
        WignerPoint& out = grid.points[idx];
        out.point = target;
        try
        {
            if (cfg.source == WignerSource::oracle)
            {
                out.w = wigner_oracle(state, target);
                continue;
            }
            cplx beta = basis_beta_for_point(target, cfg.r, cfg.phi_s);
            ProbeBasis basis = cfg.r > 0.0
                                   ? ProbeBasis::displaced_squeezed(beta, cfg.r,
                                                                    cfg.phi_s)
                                   : ProbeBasis::displaced(beta);
            WignerPoint wp = cfg.source == WignerSource::simulated
                                 ? wigner_point_from_populations(
                                       populations_in_basis(state, basis))
                                 : fitted_point(state, basis, cfg, idx);
            out.w = wp.w;
            out.sem = wp.sem;
            out.point = wp.point;
        }
        catch (Error const& e)
        {
            out.valid = false;
            out.w = std::nan("");
            errors[idx] = e.what();
        }
    }
    for (std::size_t k = 0; k < errors.size(); ++k)
        if (!grid.points[k].valid)
            grid.failures.push_back(std::to_string(k) + ": " + errors[k]);
    return grid;
}

template<class State>
WignerGrid grid_impl(State const& state,
                     GridSpec const& spec,
                     ReconstructionConfig const& cfg)
{
    WignerGrid g = reconstruct_impl(state, spec.points(), cfg);
    g.n_re = spec.n_re;
    g.n_im = spec.n_im;
    return g;
}

}  // namespace

WignerGrid reconstruct_points(FockVector const& state,
                              std::vector<cplx> const& points,
                              ReconstructionConfig const& config)
{
    return reconstruct_impl(state, points, config);
}

WignerGrid reconstruct_points(DensityMatrix const& rho,
                              std::vector<cplx> const& points,
                              ReconstructionConfig const& config)
{
    return reconstruct_impl(rho, points, config);
}

WignerGrid reconstruct_grid(FockVector const& state,
                            GridSpec const& grid,
                            ReconstructionConfig const& config)
{
    return grid_impl(state, grid, config);
}

WignerGrid reconstruct_grid(DensityMatrix const& rho,
                            GridSpec const& grid,
                            ReconstructionConfig const& config)
{
    return grid_impl(rho, grid, config);
}

//---------------------------------------------------------------------------//

FringeFit fringe_fit(WignerGrid const& cut, double alpha_guess)
{
    if (!(alpha_guess > 0.0))
        throw ValidationError("fringe_fit: alpha_guess must be > 0");
    std::vector<double> x, y, w;
    for (auto const& pt : cut.points)
    {
        if (!pt.valid)
            continue;
        x.push_back(pt.point.imag());
        y.push_back(pt.w);
        w.push_back(pt.sem);
    }
    if (x.size() < 4)
        throw ValidationError("fringe_fit: need at least 4 valid points");
    bool weighted = std::all_of(w.begin(), w.end(), [](double s) { return s > 0.0; });
    for (double& s : w)
        s = weighted ? 1.0 / (s * s) : 1.0;

    auto basis = [&](double alpha, std::size_t i)
    { return kTwoOverPi * std::exp(-2.0 * x[i] * x[i]) * std::cos(4.0 * alpha * x[i]); };
    // best A for a given alpha and the remaining weighted residual
    auto profile = [&](double alpha, double& a)
    {
        double gg = 0.0, gy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            double g = basis(alpha, i);
            gg += w[i] * g * g;
            gy += w[i] * g * y[i];
        }
        a = gg > 0.0 ? gy / gg : 0.0;
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            double d = y[i] - a * basis(alpha, i);
            ssr += w[i] * d * d;
        }
        return ssr;
    };

    double lo = 0.5 * alpha_guess, hi = 1.5 * alpha_guess;
    int const scan = 2001;
    double best_alpha = lo, best_ssr = std::numeric_limits<double>::infinity();
    double step = (hi - lo) / (scan - 1);
    for (int k = 0; k < scan; ++k)
    {
        double a_dummy = 0.0;
        double al = lo + step * k;
        double s = profile(al, a_dummy);
        if (s < best_ssr)
        {
            best_ssr = s;
            best_alpha = al;
        }
    }
    auto [alpha, ssr] = boost::math::tools::brent_find_minima(
        [&](double al)
        {
            double a_dummy = 0.0;
            return profile(al, a_dummy);
        },
        std::max(lo, best_alpha - step), std::min(hi, best_alpha + step), 52);

    FringeFit fit;
    fit.alpha = alpha;
    profile(alpha, fit.a);

    // Gauss-Newton covariance at the optimum
    double jaa = 0.0, jab = 0.0, jbb = 0.0, raw = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double e = kTwoOverPi * std::exp(-2.0 * x[i] * x[i]);
        double da = e * std::cos(4.0 * alpha * x[i]);
        double dal = -fit.a * e * 4.0 * x[i] * std::sin(4.0 * alpha * x[i]);
        jaa += w[i] * da * da;
        jab += w[i] * da * dal;
        jbb += w[i] * dal * dal;
        double d = y[i] - fit.a * da;
        raw += d * d;
    }
    double det = jaa * jbb - jab * jab;
    double scale = weighted ? 1.0 : ssr / static_cast<double>(x.size() - 2);
    if (det > 0.0)
    {
        fit.a_err = std::sqrt(scale * jbb / det);
        fit.alpha_err = std::sqrt(scale * jaa / det);
    }
    else
    {
        fit.a_err = jaa > 0.0 ? std::sqrt(scale / jaa) : 0.0;
        fit.alpha_err = std::numeric_limits<double>::infinity();
    }
    fit.residual_rms = std::sqrt(raw / static_cast<double>(x.size()));

    std::vector<double> xs = x;
    std::sort(xs.begin(), xs.end());
    double max_gap = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        max_gap = std::max(max_gap, xs[i] - xs[i - 1]);
    double period = kPi / (2.0 * alpha_guess);
    fit.aliased = max_gap > period / 4.0;
    return fit;
}

std::string fringe_report(FringeFit const& fit)
{
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "alpha = %.4f +/- %.4f, A = %+.4f +/- %.4f (|A| = %.4f), "
                  "residual_rms = %.3g%s",
                  fit.alpha, fit.alpha_err, fit.a, fit.a_err, fit.magnitude(),
                  fit.residual_rms, fit.aliased ? ", ALIASED" : "");
    return buf;
}

}  // namespace fockcat
