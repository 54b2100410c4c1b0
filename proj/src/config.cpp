#include "fockcat/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "fockcat/errors.hpp"

namespace fockcat
{
namespace
{
using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * kPi;

void check_keys(json const& j,
                std::string const& where,
                std::initializer_list<char const*> allowed)
{
    if (!j.is_object())
        throw ValidationError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        bool ok = false;
        for (char const* a : allowed)
            ok = ok || it.key() == a;
        if (!ok)
            throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

template<class T>
T get_or(json const& j, char const* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    return j.at(key).get<T>();
}

double positive(double v, std::string const& what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(what + " must be > 0");
    return v;
}

double nonnegative(double v, std::string const& what)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError(what + " must be >= 0");
    return v;
}

cplx read_complex(json const& v, std::string const& what)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ValidationError(what + " must be a number or [re, im]");
}

ProbeSideband sideband_from_string(std::string const& s)
{
    if (s == "red")
        return ProbeSideband::red;
    if (s == "blue")
        return ProbeSideband::blue;
    throw ValidationError("unknown sideband '" + s + "'");
}

// Squeeze given as r or as dB (not both).
std::optional<double> read_squeeze(json const& j, std::string const& where)
{
    bool has_r = j.contains("r"), has_db = j.contains("squeeze_db");
    if (has_r && has_db)
        throw ValidationError(where + ": give either r or squeeze_db");
    if (has_r)
        return nonnegative(j.at("r").get<double>(), where + ".r");
    if (has_db)
        return squeeze_db_to_r(nonnegative(j.at("squeeze_db").get<double>(),
                                           where + ".squeeze_db"));
    return std::nullopt;
}

double read_phase(json const& j, cplx alpha)
{
    if (!j.contains("phi_s"))
        return aligned_squeeze_phase(alpha);
    auto const& v = j.at("phi_s");
    if (v.is_string())
    {
        if (v.get<std::string>() != "aligned")
            throw ValidationError("phi_s must be a number or \"aligned\"");
        return aligned_squeeze_phase(alpha);
    }
    return v.get<double>();
}

void parse_physics(json const& j, RunConfig& c)
{
    check_keys(j, "physics",
               {"alpha", "fock_level", "eta", "sdf_rabi_hz", "probe_rabi_hz",
                "trap_hz", "heating_rate_per_s", "motional_dephasing_per_s",
                "spin_dephasing_per_s", "n_max"});
    if (j.contains("alpha"))
        c.alpha = read_complex(j.at("alpha"), "physics.alpha");
    c.fock_level = get_or(j, "fock_level", 0);
    if (c.fock_level < 0)
        throw ValidationError("physics.fock_level must be >= 0");
    c.eta = nonnegative(get_or(j, "eta", 0.0), "physics.eta");
    c.omega_sdf = kTwoPi * positive(get_or(j, "sdf_rabi_hz", 20e3), "physics.sdf_rabi_hz");
    c.omega_probe
        = kTwoPi * positive(get_or(j, "probe_rabi_hz", 31e3), "physics.probe_rabi_hz");
    c.trap_frequency = kTwoPi * positive(get_or(j, "trap_hz", 2.08e6), "physics.trap_hz");
    c.decoherence.heating_rate = get_or(j, "heating_rate_per_s", 0.0);
    c.decoherence.motional_dephasing_rate = get_or(j, "motional_dephasing_per_s", 0.0);
    c.decoherence.spin_dephasing_rate = get_or(j, "spin_dephasing_per_s", 0.0);
    c.decoherence.validate();
    c.n_max = get_or(j, "n_max", 0);
    if (c.n_max < 0)
        throw ValidationError("physics.n_max must be >= 0");
}

void parse_probe(json const& j, RunConfig& c)
{
    check_keys(j, "probe",
               {"basis", "beta", "r", "squeeze_db", "phi_s", "sideband", "decay"});
    auto kind = basis_kind_from_string(get_or<std::string>(j, "basis", "number"));
    cplx beta = j.contains("beta") ? read_complex(j.at("beta"), "probe.beta") : cplx{};
    double r = read_squeeze(j, "probe").value_or(0.0);
    double phi = read_phase(j, c.alpha);
    switch (kind)
    {
        case ProbeBasis::Kind::number:
            c.basis = ProbeBasis::number();
            break;
        case ProbeBasis::Kind::squeezed:
            c.basis = ProbeBasis::squeezed(r, phi);
            break;
        case ProbeBasis::Kind::displaced:
            c.basis = ProbeBasis::displaced(beta);
            break;
        case ProbeBasis::Kind::displaced_squeezed:
            c.basis = ProbeBasis::displaced_squeezed(beta, r, phi);
            break;
    }
    c.basis.validate();
    c.sideband = sideband_from_string(get_or<std::string>(j, "sideband", "red"));
    if (j.contains("decay"))
    {
        auto const& d = j.at("decay");
        check_keys(d, "probe.decay", {"kind", "gamma"});
        c.decay.kind = decay_kind_from_string(get_or<std::string>(d, "kind", "exponential"));
        c.decay.gamma = get_or(d, "gamma", 0.0);
        c.decay.validate();
    }
}

void parse_sampling(json const& j, RunConfig& c)
{
    check_keys(j, "sampling",
               {"t_start_us", "t_end_us", "points", "times_us", "shots", "budget"});
    if (j.contains("times_us") && (j.contains("t_end_us") || j.contains("points")))
        throw ValidationError("sampling: give either times_us or t_end_us/points");
    if (j.contains("times_us"))
    {
        for (double t : j.at("times_us").get<std::vector<double>>())
            c.times.push_back(nonnegative(t, "sampling.times_us") * 1e-6);
    }
    else if (j.contains("t_end_us") || j.contains("points"))
    {
        double t0 = nonnegative(get_or(j, "t_start_us", 0.0), "sampling.t_start_us");
        double t1 = positive(get_or(j, "t_end_us", 0.0), "sampling.t_end_us");
        int n = get_or(j, "points", 0);
        if (n < 2 || t1 <= t0)
            throw ValidationError("sampling: need points >= 2 and t_end_us > t_start_us");
        c.times = linear_times(t0 * 1e-6, t1 * 1e-6, n);
    }
    c.shots = get_or(j, "shots", 250);
    if (c.shots < 1)
        throw ValidationError("sampling.shots must be >= 1");
    auto budget = get_or<std::string>(j, "budget", "sequences");
    if (budget == "sequences")
        c.budget = ShotBudget::sequences;
    else if (budget == "accepted")
        c.budget = ShotBudget::accepted;
    else
        throw ValidationError("sampling.budget must be \"sequences\" or \"accepted\"");
}

void parse_sequence(json const& j, RunConfig& c)
{
    check_keys(j, "sequence",
               {"traces", "preparation", "detection_errors", "mcwf_trajectories",
                "herald"});
    if (j.contains("traces"))
    {
        for (auto const& t : j.at("traces"))
        {
            check_keys(t, "sequence.traces[]", {"name", "state", "sideband"});
            TraceRequest req;
            req.state = state_kind_from_string(t.at("state").get<std::string>());
            req.name = get_or<std::string>(t, "name", to_string(req.state));
            req.sideband = sideband_from_string(get_or<std::string>(t, "sideband", "red"));
            if (req.name.empty()
                || req.name.find_first_of("/\\") != std::string::npos)
                throw ValidationError("sequence.traces[].name must be a plain file stem");
            c.traces.push_back(req);
        }
    }
    c.preparation
        = preparation_from_string(get_or<std::string>(j, "preparation", "herald_up"));
    c.detection_errors = get_or(j, "detection_errors", true);
    c.mcwf_trajectories = get_or(j, "mcwf_trajectories", 400);
    if (c.mcwf_trajectories < 1)
        throw ValidationError("sequence.mcwf_trajectories must be >= 1");
    if (j.contains("herald"))
    {
        auto const& h = j.at("herald");
        check_keys(h, "sequence.herald", {"bright_mean", "dark_mean", "threshold"});
        c.herald.bright_mean = get_or(h, "bright_mean", c.herald.bright_mean);
        c.herald.dark_mean = get_or(h, "dark_mean", c.herald.dark_mean);
        c.herald.threshold = get_or(h, "threshold", c.herald.threshold);
        c.herald.validate();
    }
}

void parse_fit(json const& j, RunConfig& c)
{
    check_keys(j, "fit",
               {"model", "truth_state", "n_levels", "prior_mean", "omega_span",
                "omega_guess_hz", "fixed_omega_hz", "fixed_gamma", "strict_sum",
                "grid_points", "bootstrap"});
    auto model = get_or<std::string>(j, "model", "populations");
    if (model != "populations" && model != "mixture")
        throw ValidationError("fit.model must be \"populations\" or \"mixture\"");
    c.fit_mixture = model == "mixture";
    c.truth_state = state_kind_from_string(get_or<std::string>(j, "truth_state", "odd"));
    FitOptions& f = c.fit;
    f.n_levels = get_or(j, "n_levels", 0);
    if (f.n_levels < 0)
        throw ValidationError("fit.n_levels must be >= 0");
    f.prior_mean = get_or(j, "prior_mean", -1.0);
    f.omega_span = get_or(j, "omega_span", 0.10);
    if (!(f.omega_span > 0.0 && f.omega_span < 1.0))
        throw ValidationError("fit.omega_span must lie in (0, 1)");
    if (j.contains("omega_guess_hz"))
        f.omega_guess = kTwoPi * positive(j.at("omega_guess_hz").get<double>(),
                                          "fit.omega_guess_hz");
    if (j.contains("fixed_omega_hz"))
        f.fixed_omega = kTwoPi * positive(j.at("fixed_omega_hz").get<double>(),
                                          "fit.fixed_omega_hz");
    if (j.contains("fixed_gamma"))
        f.fixed_gamma = nonnegative(j.at("fixed_gamma").get<double>(), "fit.fixed_gamma");
    f.strict_sum = get_or(j, "strict_sum", false);
    f.grid_points = get_or(j, "grid_points", 21);
    if (f.grid_points < 1)
        throw ValidationError("fit.grid_points must be >= 1");
    f.bootstrap = get_or(j, "bootstrap", 200);
    if (f.bootstrap < 0)
        throw ValidationError("fit.bootstrap must be >= 0");
}

void parse_wigner(json const& j, RunConfig& c)
{
    check_keys(j, "wigner",
               {"source", "state", "r", "squeeze_db", "phi_s", "grid", "decohere_us",
                "fringe_alpha_guess", "bootstrap", "shots", "float_omega",
                "n_levels"});
    ReconstructionConfig& rc = c.recon;
    rc.source = wigner_source_from_string(get_or<std::string>(j, "source", "oracle"));
    c.wigner_state = state_kind_from_string(get_or<std::string>(j, "state", "odd"));
    rc.r = read_squeeze(j, "wigner").value_or(0.0);
    rc.phi_s = read_phase(j, c.alpha);
    rc.bootstrap = get_or(j, "bootstrap", 100);
    rc.shots = get_or(j, "shots", 250);
    rc.float_omega = get_or(j, "float_omega", false);
    rc.n_levels = get_or(j, "n_levels", 0);
    if (!j.contains("grid"))
        throw ValidationError("wigner.grid is required");
    auto const& g = j.at("grid");
    check_keys(g, "wigner.grid", {"re_min", "re_max", "n_re", "im_min", "im_max", "n_im"});
    c.grid.re_min = get_or(g, "re_min", 0.0);
    c.grid.re_max = get_or(g, "re_max", c.grid.re_min);
    c.grid.n_re = get_or(g, "n_re", 1);
    c.grid.im_min = get_or(g, "im_min", 0.0);
    c.grid.im_max = get_or(g, "im_max", c.grid.im_min);
    c.grid.n_im = get_or(g, "n_im", 1);
    c.grid.validate();
    c.decohere_time = nonnegative(get_or(j, "decohere_us", 0.0), "wigner.decohere_us") * 1e-6;
    if (j.contains("fringe_alpha_guess"))
        c.fringe_alpha_guess = positive(j.at("fringe_alpha_guess").get<double>(),
                                        "wigner.fringe_alpha_guess");
}

void parse_io(json const& j, RunConfig& c)
{
    check_keys(j, "io", {"inputs", "out_dir"});
    if (j.contains("inputs"))
        c.inputs = j.at("inputs").get<std::vector<std::string>>();
    c.out_dir = get_or<std::string>(j, "out_dir", ".");
}

RunConfig parse(json const& j)
{
    check_keys(j, "config",
               {"schema_version", "experiment", "seed", "label", "physics", "probe",
                "sampling", "sequence", "fit", "wigner", "io"});
    RunConfig c;
    if (!j.contains("schema_version"))
        throw ValidationError("config: schema_version is required");
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kSchemaVersion)
        throw ValidationError("config: unsupported schema_version "
                              + std::to_string(c.schema_version));
    c.experiment = get_or<std::string>(j, "experiment", "");
    if (!c.experiment.empty() && c.experiment != "simulate" && c.experiment != "herald"
        && c.experiment != "fit" && c.experiment != "wigner" && c.experiment != "report")
        throw ValidationError("config: unknown experiment '" + c.experiment + "'");
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.label = get_or<std::string>(j, "label", "");

    // physics first: alpha sets the default squeeze phase
    parse_physics(j.value("physics", json::object()), c);
    parse_probe(j.value("probe", json::object()), c);
    parse_sampling(j.value("sampling", json::object()), c);
    parse_sequence(j.value("sequence", json::object()), c);
    parse_fit(j.value("fit", json::object()), c);
    if (j.contains("wigner"))
        parse_wigner(j.at("wigner"), c);
    parse_io(j.value("io", json::object()), c);

    c.fit.eta = c.eta;
    c.fit.sideband = c.sideband;
    c.fit.seed = c.seed;
    c.recon.omega_probe = c.omega_probe;
    c.recon.eta = c.eta;
    c.recon.decay = c.decay;
    c.recon.seed = c.seed;
    c.recon.validate();
    return c;
}

}  // namespace

std::string to_string(StateKind kind)
{
    switch (kind)
    {
        case StateKind::odd:
            return "odd";
        case StateKind::even:
            return "even";
        case StateKind::mixture:
            return "mixture";
        case StateKind::coherent:
            return "coherent";
        case StateKind::fock:
            return "fock";
    }
    return "odd";
}

StateKind state_kind_from_string(std::string const& name)
{
    for (auto k : {StateKind::odd, StateKind::even, StateKind::mixture,
                   StateKind::coherent, StateKind::fock})
        if (to_string(k) == name)
            return k;
    throw ValidationError("unknown state '" + name + "'");
}

RunConfig parse_run_config(std::string const& json_text)
{
    try
    {
        return parse(json::parse(json_text));
    }
    catch (json::exception const& e)
    {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(std::string const& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace fockcat
