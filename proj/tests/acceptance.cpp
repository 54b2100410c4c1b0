// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances and runtime budgets are fixed here and not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fockcat/fit.hpp"
#include "fockcat/oscillator.hpp"
#include "fockcat/spin_dynamics.hpp"
#include "fockcat/synth.hpp"
#include "fockcat/wigner.hpp"

using namespace fockcat;

namespace
{
double const kOmegaProbe = 2.0 * kPi * 31e3;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

template<class F>
void criterion(int id, char const* title, double budget_s, F&& body)
{
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
        o = body();
    }
    catch (std::exception const& e)
    {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < budget_s;
    bool ok = o.pass && in_time;
    failures += ok ? 0 : 1;
    std::printf("criterion %2d: %s  %s  [%s; %.2f s of %.0f s]\n", id, ok ? "PASS" : "FAIL",
                title, o.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
}

std::string fmt(char const* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<double> poisson(double n_bar, int len)
{
    std::vector<double> p(static_cast<std::size_t>(len));
    for (int n = 0; n < len; ++n)
        p[static_cast<std::size_t>(n)]
            = std::exp(n * std::log(n_bar) - n_bar - std::lgamma(n + 1.0));
    return p;
}

double total_variation(std::vector<double> const& a, std::vector<double> const& b)
{
    double tv = 0.0;
    for (std::size_t n = 0; n < std::max(a.size(), b.size()); ++n)
        tv += std::abs((n < a.size() ? a[n] : 0.0) - (n < b.size() ? b[n] : 0.0));
    return 0.5 * tv;
}

std::vector<double> noiseless(std::vector<double> const& p, ProbeBasis const& basis,
                              DecayModel const& d, std::vector<double> const& times)
{
    auto rabi = rabi_frequencies(basis, kOmegaProbe, 0.0, static_cast<int>(p.size()));
    return trace_model(p, rabi, d, times);
}

double first_revival(std::vector<double> const& p, double n_bar, double t_end)
{
    double period = carrier_period(n_bar, kOmegaProbe);
    int n = static_cast<int>(std::ceil(12.0 * t_end / period)) + 1;
    auto times = linear_times(0.0, t_end, n);
    auto model = noiseless(p, ProbeBasis::number(), DecayModel{}, times);
    auto peaks = find_revivals(times, model, period);
    return peaks.empty() ? std::nan("") : peaks.front().time;
}

std::vector<cplx> im_axis(double lo, double hi, int n)
{
    std::vector<cplx> pts;
    for (int k = 0; k < n; ++k)
        pts.emplace_back(0.0, lo + (hi - lo) * k / (n - 1));
    return pts;
}

//---------------------------------------------------------------------------//

Outcome squeezed_occupation()
{
    // Operator-level mean level of the odd cat in the aligned squeezed basis
    // against the closed form. The quoted 10.77 is a rounded figure: the
    // closed form itself gives 10.760 at r = 0.9210, so it is held to 0.2%.
    double const kTarget = 10.77, kTol = 1e-3, kQuotedRel = 2e-3;
    cplx alpha{7.8, 0.0};
    double r = 0.9210;
    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha, r));
    auto pops = populations_in_basis(cat, ProbeBasis::squeezed(r, aligned_squeeze_phase(alpha)));
    double n_s = pops.mean_level();
    double formula = squeezed_mean_occupation(alpha, r);
    double n_number = populations_in_basis(cat, ProbeBasis::number()).mean_level();
    Outcome o;
    o.pass = std::abs(n_s - formula) < kTol && std::abs(n_s / kTarget - 1.0) < kQuotedRel
             && std::abs(n_number - 60.84) < 0.5;
    o.detail = fmt("<n_s> = %.5f, closed form %.5f, quoted %.2f; number basis %.3f", n_s,
                   formula, kTarget, n_number);
    return o;
}

Outcome revivals()
{
    double const kTol = 0.05;
    double n_bar = 8.76;
    auto rt = revival_times(n_bar, kOmegaProbe);
    cplx alpha{std::sqrt(n_bar), 0.0};
    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha));
    auto odd = populations_in_basis(cat, ProbeBasis::number()).p;
    double mix = first_revival(poisson(n_bar, 60), n_bar, 1.3 * rt.t_mix);
    double extra = first_revival(odd, n_bar, 1.3 * rt.t_mix);
    Outcome o;
    o.pass = std::abs(mix / 386e-6 - 1.0) < kTol && std::abs(extra / 198e-6 - 1.0) < kTol;
    o.detail = fmt("mixture %.1f us (386), odd cat %.1f us (198)", mix * 1e6, extra * 1e6);
    return o;
}

Outcome units()
{
    auto u = physical_units(2.0 * kPi * 2.08e6, kCalcium40Mass, {7.8, 0.0});
    Outcome o;
    o.pass = std::abs(u.z0 / 7.8e-9 - 1.0) < 0.01 && u.separation >= 240e-9;
    o.detail = fmt("z0 = %.3f nm, separation = %.1f nm", u.z0 * 1e9, u.separation * 1e9);
    return o;
}

Outcome oracle_fit()
{
    double const kTol = 1e-6;
    std::mt19937_64 gen(2024);
    std::exponential_distribution<double> ex(1.0);
    std::uniform_int_distribution<int> len(1, 13);
    auto times = linear_times(0.0, 500e-6, 151);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> p(static_cast<std::size_t>(len(gen)));
        for (double& x : p)
            x = ex(gen);
        double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& x : p)
            x /= s;
        DecayModel d;
        d.gamma = trial % 2 ? 200.0 : 0.0;
        SpinTrace tr;
        tr.times = times;
        tr.p_down = noiseless(p, ProbeBasis::number(), d, times);
        tr.shots.assign(times.size(), 250);
        tr.omega_probe = kOmegaProbe;
        FitOptions fo;
        fo.fixed_omega = kOmegaProbe;
        fo.fixed_gamma = d.gamma;
        fo.n_levels = 13;
        fo.bootstrap = 0;
        auto est = fit_populations(tr, DecayModel::Kind::exponential, fo);
        worst = std::max(worst, total_variation(est.p, p));
    }
    Outcome o;
    o.pass = worst < kTol;
    o.detail = fmt("worst total variation %.2e over 50 vectors (limit 1e-6)", worst);
    return o;
}

Outcome heralded_parity()
{
    SequenceConfig sc;
    sc.alpha = {3.0, 0.0};
    sc.decoherence.heating_rate = 10.0;
    sc.decay.gamma = 300.0;
    sc.times = linear_times(0.0, 500e-6, 201);
    sc.shots = 250;
    sc.budget = ShotBudget::sequences;
    auto res = run_full_sequence(sc, 5);

    FitOptions fo;
    fo.prior = res.true_populations.p;
    fo.bootstrap = 200;
    fo.seed = 5;
    auto est = fit_populations(res.trace, DecayModel::Kind::exponential, fo);
    double accepted = std::accumulate(res.trace.shots.begin(), res.trace.shots.end(), 0.0)
                      / static_cast<double>(res.trace.size());
    double z = (est.parity - res.true_parity) / est.parity_sem;
    Outcome o;
    o.pass = std::abs(z) < 3.0 && est.parity_sem > 0.01 && est.parity_sem < 0.12;
    o.detail = fmt("parity %.3f +- %.3f vs truth %.4f (z = %.2f)", est.parity,
                   est.parity_sem, res.true_parity, z)
               + fmt(", %.0f accepted shots per point", accepted);
    return o;
}

Outcome large_cat()
{
    cplx alpha{7.8, 0.0};
    double r = 0.921;
    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha, r));
    auto times = linear_times(0.0, 500e-6, 501);
    DecayModel d;

    // (a) number basis: the fit is flagged
    auto number = populations_in_basis(cat, ProbeBasis::number());
    auto tr_a = sample_trace(trace_model(number, kOmegaProbe, 0.0, d, times), times, 250,
                             substream(21, 0), ProbeBasis::number(), kOmegaProbe);
    FitOptions fa;
    fa.prior = number.p;
    fa.fixed_omega = kOmegaProbe;
    fa.fixed_gamma = 0.0;
    fa.bootstrap = 20;
    fa.seed = 21;
    auto est_a = fit_populations(tr_a, DecayModel::Kind::exponential, fa);
    double cyc_a = revival_cycles(number.mean_level());

    // (b) squeezed basis: free fit, parity recovered
    auto basis = ProbeBasis::squeezed(r, aligned_squeeze_phase(alpha));
    auto squeezed = populations_in_basis(cat, basis);
    auto tr_b = sample_trace(trace_model(squeezed, kOmegaProbe, 0.0, d, times), times, 250,
                             substream(21, 1), basis, kOmegaProbe);
    FitOptions fb;
    fb.prior = squeezed.p;
    fb.bootstrap = 100;
    fb.seed = 21;
    auto est_b = fit_populations(tr_b, DecayModel::Kind::exponential, fb);
    double cyc_b = revival_cycles(squeezed.mean_level());
    double truth = parity(squeezed);
    double z = (est_b.parity - truth) / est_b.parity_sem;

    // revival positions within 10% of the quoted 60 and 11 cycles
    Outcome o;
    o.pass = est_a.ill_conditioned && std::abs(cyc_a / 60.0 - 1.0) < 0.10
             && !est_b.ill_conditioned && std::abs(cyc_b / 11.0 - 1.0) < 0.10
             && std::abs(z) < 3.0;
    o.detail = "number: flag " + std::string(est_a.ill_conditioned ? "raised" : "clear")
               + fmt(", %.1f cycles; squeezed: flag ", cyc_a)
               + (est_b.ill_conditioned ? "raised" : "clear")
               + fmt(", %.2f cycles, parity %.3f +- %.3f (z = %.2f)", cyc_b, est_b.parity,
                     est_b.parity_sem, z);
    return o;
}

Outcome chain_identity()
{
    std::mt19937_64 gen(31);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        int support = 1 + static_cast<int>(u(gen) * 10);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(48);
        for (int n = 0; n < support; ++n)
            v[n] = cplx(g(gen), g(gen));
        FockVector state(v);
        cplx beta = std::polar(2.0 * u(gen), 2.0 * kPi * u(gen));
        double r = 0.8 * u(gen);
        auto basis = ProbeBasis::displaced_squeezed(beta, r, 2.0 * kPi * u(gen));
        auto w = wigner_point_from_populations(populations_in_basis(state, basis));
        worst = std::max(worst, std::abs(w.w - wigner_oracle(state, w.point)));
    }
    Outcome o;
    o.pass = worst < 1e-8;
    o.detail = fmt("worst |W - oracle| = %.2e over 100 cases (limit 1e-8)", worst);
    return o;
}

Outcome fringes()
{
    cplx alpha{4.25, 0.0};
    int n_max = default_n_max(alpha);
    auto cat = cat_state(alpha, CatParity::odd, n_max);
    ReconstructionConfig cfg;
    cfg.source = WignerSource::oracle;
    auto pts = im_axis(-0.8, 0.8, 65);
    auto fit = fringe_fit(reconstruct_points(cat, pts, cfg), 4.25);

    auto plus = coherent_state(alpha, n_max).amps();
    auto minus = coherent_state(-alpha, n_max).amps();
    DensityMatrix rho = 0.5 * (plus * plus.adjoint() + minus * minus.adjoint());
    auto mix = fringe_fit(reconstruct_points(rho, pts, cfg), 4.25);

    Outcome o;
    o.pass = std::abs(fit.alpha / 4.25 - 1.0) < 0.005 && std::abs(fit.magnitude() - 1.0) < 0.01
             && mix.magnitude() <= std::max(3.0 * mix.a_err, 1e-9);
    o.detail = fmt("cat alpha = %.4f, A = %.4f; mixture |A| = %.1e (err %.1e)", fit.alpha,
                   fit.a, mix.magnitude(), mix.a_err);
    return o;
}

Outcome open_system()
{
    int const n_max = 32;
    int const n_traj = 1000;
    DecoherenceSpec spec;
    spec.heating_rate = 10.0;
    double t = 10e-3;
    OperatorMatrix h = OperatorMatrix::Zero(n_max, n_max);
    auto cat = cat_state({1.0, 0.0}, CatParity::odd, n_max).amps();
    auto rho = evolve_master_equation(cat * cat.adjoint(), h, spec, t, Space::motion);
    auto me = fock_populations(rho, Space::motion);
    auto avg = mcwf_trajectories(cat, h, spec, t, n_traj, 9, Space::motion);
    // a level no trajectory reached has zero sample spread; one trajectory's
    // weight is the resolution of the estimate
    double worst = 0.0;
    for (int n = 0; n < n_max; ++n)
    {
        auto k = static_cast<std::size_t>(n);
        double s = std::max(avg.fock_sem[k], 1.0 / n_traj);
        worst = std::max(worst, std::abs(avg.fock_mean[k] - me[k]) / s);
    }

    auto vac = fock_state(0, 20).amps();
    auto rv = evolve_master_equation(vac * vac.adjoint(), OperatorMatrix::Zero(20, 20), spec,
                                     t, Space::motion);
    double mean = (number_operator(20) * rv).trace().real();

    Outcome o;
    o.pass = worst < 3.0 && std::abs(mean - 0.100) < 0.002;
    o.detail = fmt("largest |MCWF - ME| = %.2f s.e.m. over 32 levels; vacuum <n> = %.4f",
                   worst, mean);
    return o;
}

Outcome herald()
{
    auto model = HeraldModel::calibrated();
    double a = model.down_declared_up(), b = model.up_declared_down();
    auto within = [](double x, double ref) { return x <= 1.5 * ref && x >= ref / 1.5; };

    int const trials = 400000;
    Philox4x32 rng(17, 0);
    int wrong = 0;
    for (int k = 0; k < trials; ++k)
        wrong += herald_detection(false, model, rng).declared_up ? 1 : 0;
    double empirical = static_cast<double>(wrong) / trials;

    Outcome o;
    o.pass = within(a, 0.008) && within(b, 2e-5) && within(empirical, 0.008);
    o.detail = fmt("down as up %.4f%%, up as down %.5f%%, sampled %.4f%%", 100.0 * a,
                   100.0 * b, 100.0 * empirical);
    return o;
}
}  // namespace

int main()
{
    criterion(1, "squeezed occupation", 1.0, squeezed_occupation);
    criterion(2, "revival times", 5.0, revivals);
    criterion(3, "physical units", 1.0, units);
    criterion(4, "fitter oracle equivalence", 30.0, oracle_fit);
    criterion(5, "heralded parity", 120.0, heralded_parity);
    criterion(6, "large-cat contrast", 300.0, large_cat);
    criterion(7, "Wigner chain identity", 60.0, chain_identity);
    criterion(8, "fringe fit", 30.0, fringes);
    criterion(9, "open-system consistency", 300.0, open_system);
    criterion(10, "herald model", 10.0, herald);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
