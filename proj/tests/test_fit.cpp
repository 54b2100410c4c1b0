#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "fockcat/errors.hpp"
#include "fockcat/fit.hpp"
#include "fockcat/oscillator.hpp"
#include "fockcat/spin_dynamics.hpp"
#include "fockcat/synth.hpp"

using namespace fockcat;

namespace
{
double const kOmega = 2.0 * kPi * 31e3;

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

// Noiseless trace of the given populations; shots only set the weights.
SpinTrace exact_trace(std::vector<double> const& p, DecayModel const& d,
                      std::vector<double> const& times)
{
    auto rabi = rabi_frequencies(ProbeBasis::number(), kOmega, 0.0, static_cast<int>(p.size()));
    SpinTrace tr;
    tr.times = times;
    tr.p_down = trace_model(p, rabi, d, times);
    tr.shots.assign(times.size(), 250);
    tr.omega_probe = kOmega;
    return tr;
}

SpinTrace noisy_trace(std::vector<double> const& p, DecayModel const& d,
                      std::vector<double> const& times, int shots, std::uint64_t seed)
{
    auto rabi = rabi_frequencies(ProbeBasis::number(), kOmega, 0.0, static_cast<int>(p.size()));
    auto model = trace_model(p, rabi, d, times);
    return sample_trace(model, times, shots, seed, ProbeBasis::number(), kOmega);
}

DecayModel exponential(double gamma)
{
    DecayModel d;
    d.gamma = gamma;
    return d;
}

FitOptions fixed_options(double gamma, int levels)
{
    FitOptions o;
    o.fixed_omega = kOmega;
    o.fixed_gamma = gamma;
    o.n_levels = levels;
    o.bootstrap = 0;
    return o;
}
}  // namespace

TEST_CASE("noiseless Poisson trace with the true rates")
{
    auto truth = poisson(9.0, 45);
    auto times = linear_times(0.0, 500e-6, 301);
    auto est = fit_populations(exact_trace(truth, exponential(300.0), times),
                               DecayModel::Kind::exponential, fixed_options(300.0, 45));
    CHECK(total_variation(est.p, truth) < 1e-6);
    CHECK(est.residual_rms < 1e-6);
    CHECK(est.parity == doctest::Approx(std::exp(-18.0)).epsilon(1e-3));
}

TEST_CASE("oracle round trip over random populations")
{
    std::mt19937_64 gen(2024);
    std::exponential_distribution<double> ex(1.0);
    std::uniform_int_distribution<int> len(1, 13);
    auto times = linear_times(0.0, 500e-6, 151);
    for (int trial = 0; trial < 50; ++trial)
    {
        CAPTURE(trial);
        int l = len(gen);
        std::vector<double> p(static_cast<std::size_t>(l));
        for (double& x : p)
            x = ex(gen);
        double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& x : p)
            x /= s;
        double gamma = trial % 2 ? 200.0 : 0.0;
        auto est = fit_populations(exact_trace(p, exponential(gamma), times),
                                   DecayModel::Kind::exponential, fixed_options(gamma, 13));
        CHECK(total_variation(est.p, p) < 1e-6);
        double par = 0.0;
        for (std::size_t n = 0; n < est.p.size(); ++n)
            par += (n % 2 ? -1.0 : 1.0) * est.p[n];
        CHECK(est.parity == par);
        CHECK(est.total() <= 1.0 + 1e-6);
    }
}

TEST_CASE("free fit of a noiseless cat recovers the rates")
{
    auto cat = cat_state({3.0, 0.0}, CatParity::odd, 60);
    auto truth = populations_in_basis(cat, ProbeBasis::number()).p;
    auto times = linear_times(0.0, 500e-6, 251);
    FitOptions o;
    o.n_levels = 25;
    o.bootstrap = 0;
    o.omega_guess = 1.04 * kOmega;
    auto est = fit_populations(exact_trace(truth, exponential(300.0), times),
                               DecayModel::Kind::exponential, o);
    CHECK(est.omega == doctest::Approx(kOmega).epsilon(1e-5));
    CHECK(est.gamma == doctest::Approx(300.0).epsilon(1e-3));
    CHECK(est.parity == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK_FALSE(est.stalled);
    CHECK_FALSE(est.ill_conditioned);
    CHECK(est.warnings.empty());
}

TEST_CASE("odd cat parity from a 250-shot trace")
{
    auto cat = cat_state({3.0, 0.0}, CatParity::odd, 60);
    auto truth = populations_in_basis(cat, ProbeBasis::number()).p;
    auto times = linear_times(0.0, 500e-6, 201);
    // One draw. Nonnegativity pulls the zero even-level estimates up, so the
    // estimator sits about 2 s.e.m. above -1 on average at 250 shots.
    auto tr = noisy_trace(truth, exponential(300.0), times, 250, 2);
    FitOptions o;
    o.prior = truth;
    o.bootstrap = 100;
    o.seed = 4;
    auto est = fit_populations(tr, DecayModel::Kind::exponential, o);
    CHECK(std::abs(est.parity - (-1.0)) < 3.0 * est.parity_sem);
    CHECK(est.parity_sem > 0.01);
    CHECK(est.parity_sem < 0.08);
    CHECK(est.omega_sem > 0.0);
    CHECK(est.sem.size() == est.p.size());
    for (double x : est.p)
        CHECK(x >= 0.0);

    auto again = fit_populations(tr, DecayModel::Kind::exponential, o);
    CHECK(again.p == est.p);
    CHECK(again.parity_sem == est.parity_sem);

    auto report = parity_report(est);
    CHECK(report.rfind("parity = -0.", 0) == 0);
}

TEST_CASE("strict normalization")
{
    auto truth = poisson(4.0, 30);
    auto times = linear_times(0.0, 500e-6, 121);
    auto tr = noisy_trace(truth, exponential(100.0), times, 250, 6);
    auto o = fixed_options(100.0, 14);
    o.strict_sum = true;
    auto est = fit_populations(tr, DecayModel::Kind::exponential, o);
    CHECK(est.total() == doctest::Approx(1.0).epsilon(1e-9));
    o.strict_sum = false;
    auto loose = fit_populations(tr, DecayModel::Kind::exponential, o);
    CHECK(loose.total() <= 1.0 + 1e-6);
}

TEST_CASE("fit is invariant under a change of time unit")
{
    auto truth = poisson(3.0, 30);
    auto times = linear_times(0.0, 400e-6, 121);
    auto tr = noisy_trace(truth, exponential(250.0), times, 250, 12);
    FitOptions o;
    o.n_levels = 14;
    o.bootstrap = 20;
    auto est = fit_populations(tr, DecayModel::Kind::exponential, o);

    // the same record in microseconds and rad/us
    SpinTrace us = tr;
    for (double& t : us.times)
        t *= 1e6;
    us.omega_probe = tr.omega_probe * 1e-6;
    auto est_us = fit_populations(us, DecayModel::Kind::exponential, o);
    REQUIRE(est_us.p.size() == est.p.size());
    for (std::size_t n = 0; n < est.p.size(); ++n)
        CHECK(std::abs(est_us.p[n] - est.p[n]) < 1e-9);
    CHECK(std::abs(est_us.parity - est.parity) < 1e-9);
    CHECK(std::abs(est_us.parity_sem - est.parity_sem) < 1e-9);
    CHECK(est_us.omega * 1e6 == doctest::Approx(est.omega).epsilon(1e-9));
    CHECK(est_us.gamma * 1e6 == doctest::Approx(est.gamma).epsilon(1e-9));
}

TEST_CASE("truncated trace warns about overestimation")
{
    auto truth = poisson(9.0, 40);
    double t_mix = revival_times(9.0, kOmega).t_mix;
    auto times = linear_times(0.0, 0.6 * t_mix, 150);
    auto est = fit_populations(noisy_trace(truth, exponential(0.0), times, 250, 2),
                               DecayModel::Kind::exponential, fixed_options(0.0, 20));
    bool warned = false;
    for (auto const& w : est.warnings)
        warned = warned || w.find("overestimated") != std::string::npos;
    CHECK(warned);

    auto full = linear_times(0.0, 1.2 * t_mix, 150);
    auto ok = fit_populations(noisy_trace(truth, exponential(0.0), full, 250, 2),
                              DecayModel::Kind::exponential, fixed_options(0.0, 20));
    for (auto const& w : ok.warnings)
        CHECK(w.find("overestimated") == std::string::npos);
}

TEST_CASE("ill-conditioning flag")
{
    // n = 60: adjacent-level spacing ~1 kHz, below 1/t_max for 300 us
    auto truth = poisson(60.0, 130);
    auto times = linear_times(0.0, 300e-6, 400);
    auto est = fit_populations(exact_trace(truth, exponential(0.0), times),
                               DecayModel::Kind::exponential, fixed_options(0.0, 120));
    CHECK(est.ill_conditioned);

    auto small = poisson(9.0, 40);
    auto t2 = linear_times(0.0, 500e-6, 120);
    auto ok = fit_populations(exact_trace(small, exponential(0.0), t2),
                              DecayModel::Kind::exponential, fixed_options(0.0, 30));
    CHECK_FALSE(ok.ill_conditioned);
}

TEST_CASE("input validation")
{
    auto truth = poisson(2.0, 20);
    auto times = linear_times(0.0, 200e-6, 20);
    auto tr = exact_trace(truth, exponential(0.0), times);
    CHECK_THROWS_AS(fit_populations(tr, DecayModel::Kind::exponential, fixed_options(0.0, 7)),
                    ValidationError);
    CHECK_NOTHROW(fit_populations(tr, DecayModel::Kind::exponential, fixed_options(0.0, 6)));

    FitOptions none;
    none.bootstrap = 0;
    CHECK_THROWS_AS(fit_populations(tr, DecayModel::Kind::exponential, none), ValidationError);
    none.prior_mean = 2.0;
    auto longer = exact_trace(truth, exponential(0.0), linear_times(0.0, 200e-6, 40));
    CHECK(fit_populations(longer, DecayModel::Kind::exponential, none).n_levels
          == default_n_levels_poisson(2.0));

    CHECK_THROWS_AS(parity_report(PopulationEstimate{}), ValidationError);
    CHECK_THROWS_AS(parity_report(MixtureEstimate{}), ValidationError);
    CHECK_THROWS_AS(fit_mixture(tr, {0.0, 0.0}, DecayModel::Kind::exponential, none),
                    ValidationError);
}

TEST_CASE("default level count")
{
    // cumulative Poisson(2) mass passes 0.999 at n = 8
    CHECK(default_n_levels_poisson(2.0) == 8 + 1 + 4);
    CHECK(default_n_levels(poisson(2.0, 30)) == default_n_levels_poisson(2.0));
}

TEST_CASE("longer observation does not increase the parity error")
{
    auto truth = poisson(2.0, 20);
    double sum_short = 0.0, sum_long = 0.0;
    for (int seed = 0; seed < 20; ++seed)
    {
        auto o = fixed_options(100.0, 10);
        o.bootstrap = 40;
        o.seed = static_cast<std::uint64_t>(seed);
        auto t1 = linear_times(0.0, 250e-6, 61);
        auto t2 = linear_times(0.0, 500e-6, 121);
        sum_short += fit_populations(noisy_trace(truth, exponential(100.0), t1, 250, 100 + seed),
                                     DecayModel::Kind::exponential, o)
                         .parity_sem;
        sum_long += fit_populations(noisy_trace(truth, exponential(100.0), t2, 250, 100 + seed),
                                    DecayModel::Kind::exponential, o)
                        .parity_sem;
    }
    CHECK(sum_long <= sum_short);
}

TEST_CASE("mixture weight of a pure odd cat")
{
    cplx alpha{3.0, 0.0};
    auto cat = cat_state(alpha, CatParity::odd, 60);
    auto truth = populations_in_basis(cat, ProbeBasis::number()).p;
    auto times = linear_times(0.0, 500e-6, 201);
    auto tr = noisy_trace(truth, exponential(300.0), times, 250, 3);
    FitOptions o;
    o.bootstrap = 60;
    auto est = fit_mixture(tr, alpha, DecayModel::Kind::exponential, o);
    CHECK(est.xi_mix >= 0.0);
    CHECK(est.xi_mix <= 1.0);
    CHECK(std::abs(est.xi_mix - 1.0) <= 3.0 * est.xi_sem + 1e-12);
    CHECK(est.parity < -0.9);
    CHECK(parity_report(est).find("xi") != std::string::npos);
}

TEST_CASE("mixture weight of a decohered cat")
{
    // Heating decoheres |alpha> vs |-alpha> at ~4|alpha|^2 Gamma while adding
    // only Gamma t quanta, leaving close to an equal even/odd mixture.
    cplx alpha{3.0, 0.0};
    int const n_max = 54;
    auto cat = cat_state(alpha, CatParity::odd, n_max);
    DecoherenceSpec heat;
    heat.heating_rate = 100.0;
    DensityMatrix rho0 = cat.amps() * cat.amps().adjoint();
    auto rho = evolve_master_equation(rho0, OperatorMatrix::Zero(n_max, n_max), heat, 1e-3,
                                      Space::motion);
    auto truth = populations_in_basis(rho, ProbeBasis::number()).p;
    CHECK(std::abs(parity(truth)) < 0.05);

    auto times = linear_times(0.0, 500e-6, 201);
    auto tr = noisy_trace(truth, exponential(300.0), times, 250, 5);
    FitOptions o;
    o.bootstrap = 60;
    auto est = fit_mixture(tr, alpha, DecayModel::Kind::exponential, o);
    CHECK(std::abs(est.xi_mix - 0.5) <= 3.0 * est.xi_sem);
    CHECK(std::abs(est.parity) <= 3.0 * est.parity_sem);
}
