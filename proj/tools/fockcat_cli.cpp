// Batch front end: simulate, herald, fit, wigner and report subcommands.
//
// Exit codes: 0 success, 2 validation, 3 numeric failure, 4 IO.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "fockcat/config.hpp"
#include "fockcat/errors.hpp"
#include "fockcat/io.hpp"

using namespace fockcat;
namespace fs = std::filesystem;

namespace
{
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_dir;
};

std::string fmt(char const* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RunConfig load(Common const& opt, std::string const& command)
{
    RunConfig cfg = load_run_config(opt.config);
    if (!cfg.experiment.empty() && cfg.experiment != command)
        throw ValidationError("config is for '" + cfg.experiment + "', not '" + command
                              + "'");
    if (opt.seed)
    {
        cfg.seed = *opt.seed;
        cfg.fit.seed = cfg.seed;
        cfg.recon.seed = cfg.seed;
    }
    if (!opt.out_dir.empty())
        cfg.out_dir = opt.out_dir;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + cfg.out_dir + "'");
    return cfg;
}

std::string out_path(RunConfig const& cfg, std::string const& name)
{
    return (fs::path(cfg.out_dir) / name).string();
}

int state_dim(RunConfig const& cfg, double squeeze_r)
{
    if (cfg.n_max > 0)
        return cfg.n_max;
    return default_n_max(cfg.alpha, squeeze_r);
}

FockVector pure_state(RunConfig const& cfg, StateKind kind, int dim)
{
    switch (kind)
    {
        case StateKind::odd:
            return cat_state(cfg.alpha, CatParity::odd, dim);
        case StateKind::even:
            return cat_state(cfg.alpha, CatParity::even, dim);
        case StateKind::coherent:
            return coherent_state(cfg.alpha, dim);
        case StateKind::fock:
            return fock_state(cfg.fock_level, std::max(dim, cfg.fock_level + 10));
        case StateKind::mixture:
            break;
    }
    throw ValidationError("a mixture has no state vector");
}

DensityMatrix density(RunConfig const& cfg, StateKind kind, int dim)
{
    if (kind != StateKind::mixture)
    {
        auto v = pure_state(cfg, kind, dim).amps();
        return v * v.adjoint();
    }
    auto a = coherent_state(cfg.alpha, dim).amps();
    auto b = coherent_state(-cfg.alpha, dim).amps();
    return 0.5 * (a * a.adjoint() + b * b.adjoint());
}

PopulationVector populations(RunConfig const& cfg, StateKind kind, ProbeBasis const& basis)
{
    int dim = state_dim(cfg, basis.r);
    if (kind == StateKind::mixture)
        return populations_in_basis(density(cfg, kind, dim), basis);
    return populations_in_basis(pure_state(cfg, kind, dim), basis);
}

void require_times(RunConfig const& cfg)
{
    if (cfg.times.empty())
        throw ValidationError("sampling: times_us or t_end_us/points are required");
}

std::string revival_lines(double nbar, double omega)
{
    auto rt = revival_times(nbar, omega);
    std::ostringstream s;
    s << "mean_level = " << fmt("%.6g", nbar) << '\n'
      << "t_mix_us = " << fmt("%.6g", rt.t_mix * 1e6) << '\n'
      << "t_cat_us = " << fmt("%.6g", rt.t_cat * 1e6) << '\n'
      << "carrier_period_us = " << fmt("%.6g", carrier_period(nbar, omega) * 1e6) << '\n'
      << "revival_cycles = " << fmt("%.6g", revival_cycles(nbar)) << '\n';
    return s.str();
}

//---------------------------------------------------------------------------//

int cmd_simulate(Common const& opt)
{
    RunConfig cfg = load(opt, "simulate");
    require_times(cfg);
    auto traces = cfg.traces;
    if (traces.empty())
        traces.push_back({"trace", StateKind::odd, cfg.sideband});

    std::ostringstream summary;
    summary << "# simulate: alpha = " << fmt("%.6g", cfg.alpha.real()) << " + "
            << fmt("%.6g", cfg.alpha.imag()) << "i, probe omega_rad_s = "
            << fmt("%.9g", cfg.omega_probe) << ", shots = " << cfg.shots << '\n';
    for (std::size_t k = 0; k < traces.size(); ++k)
    {
        auto const& req = traces[k];
        PopulationVector pops = populations(cfg, req.state, cfg.basis);
        auto model = trace_model(pops, cfg.omega_probe, cfg.eta, cfg.decay, cfg.times,
                                 req.sideband);
        SpinTrace tr = sample_trace(model, cfg.times, cfg.shots, substream(cfg.seed, k),
                                    cfg.basis, cfg.omega_probe);
        write_spin_trace(out_path(cfg, req.name + ".csv"), tr);

        double nbar = pops.mean_level();
        summary << "\n[" << req.name << "]\n"
                << "state = " << to_string(req.state) << '\n'
                << "sideband = " << (req.sideband == ProbeSideband::red ? "red" : "blue")
                << '\n'
                << "parity = " << fmt("%.6f", parity(pops)) << '\n'
                << revival_lines(nbar, cfg.omega_probe);
        bool uniform = cfg.times.size() > 2;
        for (std::size_t i = 2; uniform && i < cfg.times.size(); ++i)
            uniform = std::abs((cfg.times[i] - cfg.times[i - 1])
                               - (cfg.times[1] - cfg.times[0]))
                      < 1e-9 * cfg.times.back();
        if (uniform)
        {
            auto peaks = find_revivals(cfg.times, model,
                                       carrier_period(nbar, cfg.omega_probe));
            for (auto const& p : peaks)
                summary << "model_revival_us = " << fmt("%.2f", p.time * 1e6) << '\n';
        }
        std::cout << req.name << ": " << tr.size() << " points, parity "
                  << fmt("%+.4f", parity(pops)) << '\n';
    }
    write_text(out_path(cfg, "simulate_summary.txt"), summary.str());
    return 0;
}

int cmd_herald(Common const& opt)
{
    RunConfig cfg = load(opt, "herald");
    require_times(cfg);
    SequenceConfig sc;
    sc.alpha = cfg.alpha;
    sc.omega_sdf = cfg.omega_sdf;
    sc.preparation = cfg.preparation;
    sc.herald = cfg.herald;
    sc.detection_errors = cfg.detection_errors;
    sc.basis = cfg.basis;
    sc.omega_probe = cfg.omega_probe;
    sc.eta = cfg.eta;
    sc.decay = cfg.decay;
    sc.decoherence = cfg.decoherence;
    sc.mcwf_trajectories = cfg.mcwf_trajectories;
    sc.times = cfg.times;
    sc.shots = cfg.shots;
    sc.budget = cfg.budget;
    sc.n_max = cfg.n_max;
    SequenceResult res = run_full_sequence(sc, cfg.seed);

    write_spin_trace(out_path(cfg, "trace.csv"), res.trace);
    write_populations_csv(out_path(cfg, "true_populations.csv"), res.true_populations.p);
    std::ostringstream s;
    s << "preparation = " << to_string(cfg.preparation) << '\n'
      << "acceptance_rate = " << fmt("%.6f", res.acceptance_rate) << '\n'
      << "true_parity = " << fmt("%.6f", res.true_parity) << '\n'
      << "misherald_fraction = " << fmt("%.6g", res.misherald_fraction) << '\n'
      << "dropped_points = " << res.dropped_points << '\n'
      << "down_declared_up = " << fmt("%.6g", cfg.herald.down_declared_up()) << '\n'
      << "up_declared_down = " << fmt("%.6g", cfg.herald.up_declared_down()) << '\n';
    write_text(out_path(cfg, "herald_summary.txt"), s.str());
    std::cout << s.str();
    return 0;
}

int cmd_fit(Common const& opt, std::vector<std::string> const& extra_inputs)
{
    RunConfig cfg = load(opt, "fit");
    auto inputs = extra_inputs.empty() ? cfg.inputs : extra_inputs;
    if (inputs.empty())
        throw ValidationError("fit: no input traces (io.inputs or --input)");

    for (auto const& in : inputs)
    {
        SpinTrace tr = read_spin_trace(in);
        std::string stem = fs::path(in).stem().string();
        PopulationVector truth = populations(cfg, cfg.truth_state, tr.basis);
        FitOptions fo = cfg.fit;
        if (fo.n_levels == 0 && fo.prior_mean < 0.0 && fo.prior.empty())
            fo.prior = truth.p;

        std::string text;
        if (cfg.fit_mixture)
        {
            MixtureEstimate est = fit_mixture(tr, cfg.alpha, cfg.decay.kind, fo);
            write_populations_csv(out_path(cfg, stem + "_estimate.csv"),
                                  est.populations.p);
            text = estimate_summary(est);
            std::cout << stem << ": " << parity_report(est) << '\n';
        }
        else
        {
            PopulationEstimate est = fit_populations(tr, cfg.decay.kind, fo);
            write_populations_csv(out_path(cfg, stem + "_estimate.csv"), est.p, est.sem);
            text = estimate_summary(est);
            std::cout << stem << ": " << parity_report(est) << '\n';
            for (auto const& w : est.warnings)
                std::cout << stem << ": warning: " << w << '\n';
        }
        // expected revival position with and without the squeezed basis
        double n_number = std::norm(cfg.alpha);
        text += "expected_revival_cycles_number_basis = "
                + fmt("%.4g", revival_cycles(n_number)) + '\n';
        text += "expected_revival_cycles_probe_basis = "
                + fmt("%.4g", revival_cycles(truth.mean_level())) + '\n';
        write_text(out_path(cfg, stem + "_summary.txt"), text);
    }
    return 0;
}

int cmd_wigner(Common const& opt)
{
    RunConfig cfg = load(opt, "wigner");
    int dim = state_dim(cfg, cfg.recon.r);
    WignerGrid grid;
    if (cfg.wigner_state == StateKind::mixture || cfg.decohere_time > 0.0)
    {
        DensityMatrix rho = density(cfg, cfg.wigner_state, dim);
        if (cfg.decohere_time > 0.0)
        {
            DecoherenceSpec motion = cfg.decoherence;
            motion.spin_dephasing_rate = 0.0;
            OperatorMatrix h = OperatorMatrix::Zero(rho.rows(), rho.cols());
            rho = evolve_master_equation(rho, h, motion, cfg.decohere_time, Space::motion);
        }
        grid = reconstruct_grid(rho, cfg.grid, cfg.recon);
    }
    else
    {
        grid = reconstruct_grid(pure_state(cfg, cfg.wigner_state, dim), cfg.grid,
                                cfg.recon);
    }
    write_wigner_csv(out_path(cfg, "wigner.csv"), grid);
    write_wigner_pgm(out_path(cfg, "wigner.pgm"), grid);

    std::ostringstream s;
    s << "source = " << to_string(grid.source) << '\n'
      << "points = " << grid.points.size() << '\n'
      << "holes = " << grid.failures.size() << '\n';
    for (auto const& f : grid.failures)
        s << "hole = " << f << '\n';
    double wmin = 1.0, w0 = std::nan("");
    double best = 1e300;
    for (auto const& p : grid.points)
    {
        if (!p.valid)
            continue;
        wmin = std::min(wmin, p.w);
        if (std::abs(p.point) < best)
        {
            best = std::abs(p.point);
            w0 = p.w;
        }
    }
    s << "w_min = " << fmt("%.6f", wmin) << '\n'
      << "w_nearest_origin = " << fmt("%.6f", w0) << '\n';
    if (cfg.fringe_alpha_guess)
    {
        // fit the column closest to Re(beta) = 0
        WignerGrid cut;
        cut.source = grid.source;
        double re0 = 1e300;
        for (auto const& p : grid.points)
            re0 = std::abs(p.point.real()) < std::abs(re0) ? p.point.real() : re0;
        for (auto const& p : grid.points)
            if (std::abs(p.point.real() - re0) < 1e-9)
                cut.points.push_back(p);
        FringeFit ff = fringe_fit(cut, *cfg.fringe_alpha_guess);
        s << "fringe_alpha = " << fmt("%.6f", ff.alpha) << '\n'
          << "fringe_alpha_err = " << fmt("%.6f", ff.alpha_err) << '\n'
          << "fringe_A_signed = " << fmt("%.6f", ff.a) << '\n'
          << "fringe_A_magnitude = " << fmt("%.6f", ff.magnitude()) << '\n'
          << "fringe_A_err = " << fmt("%.6f", ff.a_err) << '\n'
          << "fringe_aliased = " << (ff.aliased ? "true" : "false") << '\n'
          << "fringe_report = " << fringe_report(ff) << '\n';
    }
    write_text(out_path(cfg, "wigner_summary.txt"), s.str());
    std::cout << s.str();
    return 0;
}

int cmd_report(Common const& opt)
{
    RunConfig cfg = load(opt, "report");
    double a = std::abs(cfg.alpha);
    double r = cfg.basis.r;
    auto units = physical_units(cfg.trap_frequency, kCalcium40Mass, cfg.alpha);
    std::ostringstream s;
    s << "alpha_abs = " << fmt("%.6g", a) << '\n'
      << "z0_nm = " << fmt("%.6g", units.z0 * 1e9) << '\n'
      << "separation_nm = " << fmt("%.6g", units.separation * 1e9) << '\n'
      << "squeeze_r = " << fmt("%.6g", r) << '\n'
      << "squeeze_db = " << fmt("%.6g", squeeze_r_to_db(r)) << '\n'
      << "optimal_squeeze_r = " << fmt("%.6g", optimal_squeeze(cfg.alpha)) << '\n'
      << "\n[number_basis]\n"
      << revival_lines(a * a, cfg.omega_probe)
      << "\n[squeezed_basis]\n"
      << revival_lines(squeezed_mean_occupation(cfg.alpha, r), cfg.omega_probe);
    write_text(out_path(cfg, "report.txt"), s.str());
    std::cout << s.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fockcat: cat-state synthesis, population fitting and Wigner "
                 "reconstruction"};
    app.require_subcommand(1);
    Common opt;
    std::vector<std::string> inputs;

    auto add_common = [&](CLI::App* sub)
    {
        sub->add_option("--config,-c", opt.config, "JSON run configuration")
            ->required();
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--threads", opt.threads,
                        "worker threads (default: available cores)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out-dir", opt.out_dir, "override io.out_dir");
    };
    auto* sim = app.add_subcommand("simulate", "synthesize spin traces of ideal states");
    auto* her = app.add_subcommand("herald", "run the full heralded sequence");
    auto* fit = app.add_subcommand("fit", "fit populations and parity to traces");
    auto* wig = app.add_subcommand("wigner", "reconstruct Wigner points, grids and cuts");
    auto* rep = app.add_subcommand("report", "derived scales and revival positions");
    for (auto* s : {sim, her, fit, wig, rep})
        add_common(s);
    fit->add_option("--input,-i", inputs, "trace CSV files (replace io.inputs)");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    if (opt.threads > 0)
        omp_set_num_threads(opt.threads);
    try
    {
        if (*sim)
            return cmd_simulate(opt);
        if (*her)
            return cmd_herald(opt);
        if (*fit)
            return cmd_fit(opt, inputs);
        if (*wig)
            return cmd_wigner(opt);
        return cmd_report(opt);
    }
    catch (ValidationError const& e)
    {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    }
    catch (IoError const& e)
    {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    }
    catch (Error const& e)
    {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    catch (std::exception const& e)
    {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
