#include "fockcat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fockcat/errors.hpp"

namespace fockcat
{
namespace
{
constexpr std::uint64_t kTraceDomain = 0x7472616365ull;     // "trace"
constexpr std::uint64_t kSequenceDomain = 0x736571ull;      // "seq"
constexpr std::uint64_t kHeraldDomain = 0x6865726c64ull;    // "herld"
constexpr std::uint64_t kHeatingDomain = 0x68656174ull;     // "heat"

double poisson_cdf(int k, double mu)
{
    if (k < 0)
        return 0.0;
    double term = std::exp(-mu);
    double sum = term;
    for (int j = 1; j <= k; ++j)
    {
        term *= mu / j;
        sum += term;
    }
    return std::min(sum, 1.0);
}

// Bisection for a monotone f on [lo, hi] with f(lo), f(hi) bracketing target.
template<class F>
double bisect(F f, double lo, double hi, double target)
{
    double flo = f(lo) - target;
    for (int it = 0; it < 200; ++it)
    {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid) - target;
        if ((fm > 0) == (flo > 0))
        {
            lo = mid;
            flo = fm;
        }
        else
        {
            hi = mid;
        }
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(hi)))
            break;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> pad(std::vector<double> v, std::size_t n)
{
    v.resize(std::max(v.size(), n), 0.0);
    return v;
}

}  // namespace

//---------------------------------------------------------------------------//
// SpinTrace and decay
//---------------------------------------------------------------------------//

double SpinTrace::max_time() const
{
    return times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
}

void SpinTrace::validate() const
{
    if (times.size() != p_down.size() || times.size() != shots.size())
        throw ValidationError("SpinTrace: column lengths differ");
    if (times.empty())
        throw ValidationError("SpinTrace: no points");
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw ValidationError("SpinTrace: times must be finite and >= 0");
        if (!(p_down[i] >= 0.0 && p_down[i] <= 1.0))
            throw ValidationError("SpinTrace: p_down outside [0, 1]");
        if (shots[i] < 1)
            throw ValidationError("SpinTrace: shots must be >= 1");
    }
    if (!(std::isfinite(omega_probe) && omega_probe >= 0.0))
        throw ValidationError("SpinTrace: omega_probe must be >= 0");
    basis.validate();
}

void DecayModel::validate() const
{
    if (!(std::isfinite(gamma) && gamma >= 0.0))
        throw ValidationError("DecayModel: gamma must be finite and >= 0");
}

double DecayModel::factor(double t, int n) const
{
    switch (kind)
    {
        case Kind::exponential:
            return std::exp(-gamma * t);
        case Kind::gaussian:
            return std::exp(-gamma * t * t);
        case Kind::gaussian_level_scaled:
            return std::exp(-gamma * (n + 1.0) * t * t);
    }
    return 1.0;
}

std::string to_string(DecayModel::Kind kind)
{
    switch (kind)
    {
        case DecayModel::Kind::exponential:
            return "exponential";
        case DecayModel::Kind::gaussian:
            return "gaussian";
        case DecayModel::Kind::gaussian_level_scaled:
            return "gaussian_level_scaled";
    }
    return "exponential";
}

DecayModel::Kind decay_kind_from_string(std::string const& name)
{
    if (name == "exponential")
        return DecayModel::Kind::exponential;
    if (name == "gaussian")
        return DecayModel::Kind::gaussian;
    if (name == "gaussian_level_scaled")
        return DecayModel::Kind::gaussian_level_scaled;
    throw ValidationError("unknown decay kind '" + name + "'");
}

//---------------------------------------------------------------------------//
// Trace model and revivals
//---------------------------------------------------------------------------//

std::vector<double> trace_model(std::span<double const> p,
                                std::span<double const> rabi,
                                DecayModel const& decay,
                                std::span<double const> times,
                                ProbeSideband sideband)
{
    decay.validate();
    if (rabi.size() < p.size())
        throw ValidationError("trace_model: fewer Rabi frequencies than levels");
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        double t = times[i];
        double s = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n)
        {
            if (p[n] == 0.0)
                continue;
            double g = decay.factor(t, static_cast<int>(n));
            s += p[n] * (1.0 - g * std::cos(0.5 * rabi[n] * t));
        }
        double v = std::clamp(0.5 * s, 0.0, 1.0);
        out[i] = sideband == ProbeSideband::red ? v : 1.0 - v;
    }
    return out;
}

std::vector<double> trace_model(PopulationVector const& pops,
                                double omega,
                                double eta,
                                DecayModel const& decay,
                                std::span<double const> times,
                                ProbeSideband sideband)
{
    // Levels past the last one carrying mass add nothing to the trace, but a
    // squeezed basis would have to build S|n> for each of them.
    std::size_t count = pops.p.size();
    double tail = 0.0;
    while (count > 1 && tail + pops.p[count - 1] <= kNegligibleTailMass)
        tail += pops.p[--count];
    auto rabi = rabi_frequencies(pops.basis, omega, eta, static_cast<int>(count));
    return trace_model(std::span<double const>(pops.p.data(), count), rabi, decay, times,
                       sideband);
}

RevivalTimes revival_times(double n_bar, double omega)
{
    if (!(n_bar >= 0.0) || !(omega > 0.0))
        throw ValidationError("revival_times: need n_bar >= 0 and omega > 0");
    double s0 = std::sqrt(n_bar);
    double s1 = std::sqrt(n_bar + 1.0);
    double s2 = std::sqrt(n_bar + 2.0);
    return {4.0 * kPi / (omega * (s1 - s0)), 4.0 * kPi / (omega * (s2 - s0))};
}

double carrier_period(double n_bar, double omega)
{
    return 4.0 * kPi / (omega * std::sqrt(n_bar + 1.0));
}

double revival_cycles(double n_bar)
{
    return std::sqrt(n_bar + 1.0)
           / (std::sqrt(n_bar + 2.0) - std::sqrt(n_bar));
}

std::vector<RevivalPeak> find_revivals(std::span<double const> times,
                                       std::span<double const> p_down,
                                       double period)
{
    auto const n = times.size();
    if (n != p_down.size() || n < 5)
        throw ValidationError("find_revivals: need >= 5 matching samples");
    double dt = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
    if (!(dt > 0.0) || !(period > 0.0))
        throw ValidationError("find_revivals: bad sampling or period");
    auto half = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(0.5 * period / dt)));
    auto const sn = static_cast<std::ptrdiff_t>(n);

    // one-period boxcar applied twice: the second pass removes the ripple the
    // first leaves when the period does not divide the sampling exactly
    auto boxcar = [&](std::vector<double> const& in)
    {
        std::vector<double> out(n);
        for (std::ptrdiff_t i = 0; i < sn; ++i)
        {
            auto lo = std::max<std::ptrdiff_t>(0, i - half);
            auto hi = std::min<std::ptrdiff_t>(sn - 1, i + half);
            double s = 0.0;
            for (auto j = lo; j <= hi; ++j)
                s += in[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
        }
        return out;
    };
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i)
        dev[i] = std::abs(p_down[i] - 0.5);
    std::vector<double> env = boxcar(boxcar(dev));

    double span = *std::max_element(env.begin(), env.end())
                  - *std::min_element(env.begin(), env.end());
    double min_prominence = 0.05 * span;

    std::vector<RevivalPeak> peaks;
    // skip the initial collapse: start once the envelope has fallen below
    // half of its value over the first carrier period
    auto early = std::min<std::size_t>(n, static_cast<std::size_t>(2 * half + 1));
    double early_max = *std::max_element(env.begin(), env.begin() + early);
    std::size_t start = 1;
    while (start + 1 < n && env[start] >= 0.5 * early_max)
        ++start;
    for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < n; ++i)
    {
        if (!(env[i] >= env[i - 1] && env[i] > env[i + 1]))
            continue;
        double left_min = env[i];
        for (std::size_t j = i; j-- > 0;)
        {
            if (env[j] > env[i])
                break;
            left_min = std::min(left_min, env[j]);
        }
        double right_min = env[i];
        for (std::size_t j = i + 1; j < n; ++j)
        {
            if (env[j] > env[i])
                break;
            right_min = std::min(right_min, env[j]);
        }
        double prominence = env[i] - std::max(left_min, right_min);
        if (prominence < min_prominence)
            continue;

        // least-squares parabola over the top half of the lobe; revival
        // lobes are flat-topped, so the bare sample maximum is unstable
        double cut = env[i] - 0.5 * prominence;
        std::size_t lo = i, hi = i;
        while (lo > 0 && env[lo - 1] >= cut)
            --lo;
        while (hi + 1 < n && env[hi + 1] >= cut)
            ++hi;
        double t_peak = times[i], h_peak = env[i];
        if (hi - lo >= 2)
        {
            Eigen::MatrixXd a(static_cast<Eigen::Index>(hi - lo + 1), 3);
            Eigen::VectorXd b(a.rows());
            for (std::size_t k = lo; k <= hi; ++k)
            {
                double x = (times[k] - times[i]) / dt;
                auto r = static_cast<Eigen::Index>(k - lo);
                a(r, 0) = 1.0;
                a(r, 1) = x;
                a(r, 2) = x * x;
                b[r] = env[k];
            }
            Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
            double lo_x = (times[lo] - times[i]) / dt;
            double hi_x = (times[hi] - times[i]) / dt;
            if (c[2] < 0.0)
            {
                double x = std::clamp(-c[1] / (2.0 * c[2]), lo_x, hi_x);
                t_peak = times[i] + x * dt;
                h_peak = c[0] + c[1] * x + c[2] * x * x;
            }
        }
        peaks.push_back({t_peak, h_peak});
        i = hi;  // one peak per lobe
    }
    return peaks;
}

std::vector<double> linear_times(double t0, double t1, int n)
{
    if (n < 2 || !(t1 > t0))
        throw ValidationError("linear_times: need n >= 2 and t1 > t0");
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        t[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / (n - 1);
    return t;
}

SpinTrace sample_trace(std::span<double const> model,
                       std::span<double const> times,
                       std::span<int const> shots,
                       std::uint64_t seed,
                       ProbeBasis const& basis,
                       double omega_probe)
{
    if (model.size() != times.size() || shots.size() != times.size())
        throw ValidationError("sample_trace: length mismatch");
    SpinTrace tr;
    tr.times.assign(times.begin(), times.end());
    tr.shots.assign(shots.begin(), shots.end());
    tr.p_down.resize(times.size());
    tr.basis = basis;
    tr.omega_probe = omega_probe;
    for (int s : tr.shots)
        if (s < 1)
            throw ValidationError("sample_trace: shots must be >= 1");
    auto const n = static_cast<std::int64_t>(times.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
    {
        auto k = static_cast<std::size_t>(i);
        Philox4x32 rng(seed, substream(kTraceDomain, k));
        std::binomial_distribution<int> dist(tr.shots[k],
                                             std::clamp(model[k], 0.0, 1.0));
        tr.p_down[k] = static_cast<double>(dist(rng)) / tr.shots[k];
    }
    return tr;
}

SpinTrace sample_trace(std::span<double const> model,
                       std::span<double const> times,
                       int shots,
                       std::uint64_t seed,
                       ProbeBasis const& basis,
                       double omega_probe)
{
    std::vector<int> s(times.size(), shots);
    return sample_trace(model, times, s, seed, basis, omega_probe);
}

//---------------------------------------------------------------------------//
// Heralding
//---------------------------------------------------------------------------//

void HeraldModel::validate() const
{
    if (!(std::isfinite(bright_mean) && std::isfinite(dark_mean)
          && dark_mean >= 0.0 && bright_mean > threshold
          && threshold >= 0 && static_cast<double>(threshold) >= dark_mean))
        throw ValidationError("HeraldModel: need bright_mean > threshold >= "
                              "dark_mean >= 0");
    if (!(std::isfinite(detect_time) && detect_time >= 0.0))
        throw ValidationError("HeraldModel: detect_time must be >= 0");
}

double HeraldModel::down_declared_up() const
{
    return poisson_cdf(threshold, bright_mean);
}

double HeraldModel::up_declared_down() const
{
    return 1.0 - poisson_cdf(threshold, dark_mean);
}

HeraldModel
HeraldModel::calibrated(double down_as_up, double up_as_down, int threshold)
{
    if (!(down_as_up > 0.0 && down_as_up < 1.0 && up_as_down > 0.0
          && up_as_down < 1.0 && threshold >= 0))
        throw ValidationError("HeraldModel::calibrated: rates must be in (0,1)");
    HeraldModel m;
    m.threshold = threshold;
    m.bright_mean = bisect([&](double mu) { return poisson_cdf(threshold, mu); },
                           threshold, 10.0 * threshold + 200.0, down_as_up);
    m.dark_mean
        = bisect([&](double mu) { return 1.0 - poisson_cdf(threshold, mu); },
                 0.0, threshold + 1.0, up_as_down);
    m.validate();
    return m;
}

HeraldDetection
herald_detection(bool spin_is_up, HeraldModel const& model, Philox4x32& rng)
{
    double mean = spin_is_up ? model.dark_mean : model.bright_mean;
    int count = 0;
    if (mean > 0.0)
    {
        std::poisson_distribution<int> dist(mean);
        count = dist(rng);
    }
    return {count, count <= model.threshold};
}

HeraldDetection herald_detection(bool spin_is_up,
                                 HeraldModel const& model,
                                 std::uint64_t seed)
{
    model.validate();
    Philox4x32 rng(seed, kHeraldDomain);
    return herald_detection(spin_is_up, model, rng);
}

//---------------------------------------------------------------------------//
// Full sequence
//---------------------------------------------------------------------------//

std::string to_string(Preparation prep)
{
    switch (prep)
    {
        case Preparation::repump:
            return "repump";
        case Preparation::herald_up:
            return "herald_up";
        case Preparation::herald_up_flip:
            return "herald_up_flip";
    }
    return "herald_up";
}

Preparation preparation_from_string(std::string const& name)
{
    if (name == "repump")
        return Preparation::repump;
    if (name == "herald_up")
        return Preparation::herald_up;
    if (name == "herald_up_flip")
        return Preparation::herald_up_flip;
    throw ValidationError("unknown preparation '" + name + "'");
}

void SequenceConfig::validate() const
{
    if (!(std::isfinite(alpha.real()) && std::isfinite(alpha.imag())))
        throw ValidationError("SequenceConfig: alpha must be finite");
    if (!(omega_sdf > 0.0) || !(omega_probe > 0.0))
        throw ValidationError("SequenceConfig: Rabi rates must be > 0");
    if (!(std::isfinite(eta) && eta >= 0.0))
        throw ValidationError("SequenceConfig: eta must be >= 0");
    if (shots < 1)
        throw ValidationError("SequenceConfig: shots must be >= 1");
    if (times.empty())
        throw ValidationError("SequenceConfig: no probe times");
    for (double t : times)
        if (!(std::isfinite(t) && t >= 0.0))
            throw ValidationError("SequenceConfig: probe times must be >= 0");
    if (mcwf_trajectories < 1)
        throw ValidationError("SequenceConfig: mcwf_trajectories must be >= 1");
    if (n_max < 0)
        throw ValidationError("SequenceConfig: n_max must be >= 0");
    herald.validate();
    basis.validate();
    decay.validate();
    decoherence.validate();
}

namespace
{
// Populations of a motional state after the herald window decoherence.
PopulationVector delivered_populations(FockVector const& motion,
                                       SequenceConfig const& cfg,
                                       std::uint64_t seed)
{
    double t = cfg.herald.detect_time;
    if (cfg.decoherence.is_zero() || t == 0.0)
        return populations_in_basis(motion, cfg.basis);
    int const n = motion.dim();
    OperatorMatrix h = OperatorMatrix::Zero(n, n);
    if (n <= kMaxMasterEquationDim)
    {
        DensityMatrix rho = motion.amps() * motion.amps().adjoint();
        DensityMatrix out
            = evolve_master_equation(rho, h, cfg.decoherence, t, Space::motion);
        return populations_in_basis(out, cfg.basis);
    }
    auto traj = mcwf_trajectories(motion.amps(), h, cfg.decoherence, t,
                                  cfg.mcwf_trajectories, seed, Space::motion,
                                  true);
    std::vector<double> acc;
    for (auto const& psi : traj.final_states)
    {
        auto p = populations_in_basis(FockVector(psi, false), cfg.basis).p;
        acc = pad(std::move(acc), p.size());
        for (std::size_t k = 0; k < p.size(); ++k)
            acc[k] += p[k];
    }
    for (double& x : acc)
        x /= static_cast<double>(traj.final_states.size());
    return {std::move(acc), cfg.basis};
}
}  // namespace

SequenceResult run_full_sequence(SequenceConfig const& cfg, std::uint64_t seed)
{
    cfg.validate();
    int const n_max = cfg.n_max > 0 ? cfg.n_max : default_n_max(cfg.alpha);
    double const amp = std::abs(cfg.alpha);

    // |down>|0> under the state-dependent force for |alpha| = Omega t / 2
    HamiltonianSpec sdf;
    sdf.kind = HamiltonianSpec::Kind::state_dependent_force;
    sdf.omega = cfg.omega_sdf;
    sdf.phase = std::arg(cfg.alpha) + 0.5 * kPi;
    SpinFockState state
        = SpinFockState::product(1.0, 0.0, fock_state(0, n_max));
    if (amp > 0.0)
        state = evolve_unitary(state, build_hamiltonian(sdf, n_max),
                               2.0 * amp / cfg.omega_sdf);

    SequenceResult res;
    ProbeSideband sideband = ProbeSideband::red;
    PopulationVector pop_up, pop_down;
    double p_up = 1.0;
    double e_du = 0.0, e_ud = 0.0;

    if (cfg.preparation == Preparation::repump)
    {
        sideband = ProbeSideband::blue;
        DensityMatrix rho = state.down * state.down.adjoint()
                            + state.up * state.up.adjoint();
        pop_up = populations_in_basis(rho, cfg.basis);
        pop_down = pop_up;
    }
    else
    {
        bool flip = cfg.preparation == Preparation::herald_up_flip;
        auto up = herald_project(state, SpinOutcome::up, flip);
        auto down = herald_project(state, SpinOutcome::down, flip);
        p_up = up.probability;
        pop_up = delivered_populations(up.motion, cfg,
                                       substream(kHeatingDomain, seed));
        pop_down = delivered_populations(down.motion, cfg,
                                         substream(kHeatingDomain, seed + 1));
        if (cfg.detection_errors)
        {
            e_du = cfg.herald.down_declared_up();
            e_ud = cfg.herald.up_declared_down();
        }
    }

    std::size_t len = std::max(pop_up.p.size(), pop_down.p.size());
    pop_up.p = pad(std::move(pop_up.p), len);
    pop_down.p = pad(std::move(pop_down.p), len);
    auto rabi = rabi_frequencies(cfg.basis, cfg.omega_probe, cfg.eta,
                                 static_cast<int>(len));
    auto model_up = trace_model(pop_up.p, rabi, cfg.decay, cfg.times, sideband);
    auto model_down
        = trace_model(pop_down.p, rabi, cfg.decay, cfg.times, sideband);

    double acc_up = p_up * (1.0 - e_ud);
    double acc_down = (1.0 - p_up) * e_du;
    double f = acc_down / (acc_up + acc_down);
    res.misherald_fraction = f;
    res.true_populations.basis = cfg.basis;
    res.true_populations.p.resize(len);
    for (std::size_t k = 0; k < len; ++k)
        res.true_populations.p[k] = (1.0 - f) * pop_up.p[k] + f * pop_down.p[k];
    res.true_parity = parity(res.true_populations);
    res.model.resize(cfg.times.size());
    for (std::size_t i = 0; i < cfg.times.size(); ++i)
        res.model[i] = (1.0 - f) * model_up[i] + f * model_down[i];

    auto const n_pts = static_cast<std::int64_t>(cfg.times.size());
    std::vector<int> accepted(cfg.times.size(), 0), downs(cfg.times.size(), 0),
        sequences(cfg.times.size(), 0);
    bool const retry = cfg.budget == ShotBudget::accepted;
    bool const heralded = cfg.preparation != Preparation::repump;
    int const max_attempts = 1000 * cfg.shots;
    bool starved = false;

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_pts; ++i)
    {
        auto k = static_cast<std::size_t>(i);
        Philox4x32 rng(seed, substream(kSequenceDomain, k));
        int acc = 0, dn = 0, seq = 0;
        while (retry ? acc < cfg.shots : seq < cfg.shots)
        {
            if (seq >= max_attempts)
            {
#pragma omp atomic write
                starved = true;
                break;
            }
            ++seq;
            bool true_up = true;
            if (heralded)
            {
                true_up = rng.uniform_open() < p_up;
                bool declared = cfg.detection_errors
                                    ? herald_detection(true_up, cfg.herald, rng)
                                          .declared_up
                                    : true_up;
                if (!declared)
                    continue;
            }
            ++acc;
            double p = true_up ? model_up[k] : model_down[k];
            if (rng.uniform_open() < p)
                ++dn;
        }
        accepted[k] = acc;
        downs[k] = dn;
        sequences[k] = seq;
    }
    if (starved)
        throw NumericError("run_full_sequence: herald acceptance too low to "
                           "collect the requested shots");

    long total_acc = 0, total_seq = 0;
    res.trace.basis = cfg.basis;
    res.trace.omega_probe = cfg.omega_probe;
    for (std::size_t k = 0; k < cfg.times.size(); ++k)
    {
        total_acc += accepted[k];
        total_seq += sequences[k];
        if (accepted[k] == 0)
        {
            ++res.dropped_points;
            continue;
        }
        res.trace.times.push_back(cfg.times[k]);
        res.trace.p_down.push_back(static_cast<double>(downs[k]) / accepted[k]);
        res.trace.shots.push_back(accepted[k]);
    }
    res.acceptance_rate = total_seq > 0 ? static_cast<double>(total_acc)
                                              / static_cast<double>(total_seq)
                                        : 0.0;
    return res;
}

}  // namespace fockcat
