#include "fockcat/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fockcat/errors.hpp"

namespace fockcat
{
namespace
{
std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(std::string const& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_in(std::string const& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    return f;
}

void finish(std::ofstream& f, std::string const& path)
{
    f.flush();
    if (!f)
        throw IoError("write to '" + path + "' failed");
}

std::vector<std::string> split(std::string const& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

std::string trim(std::string s)
{
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(static_cast<unsigned char>(s.back())))
        s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && issp(static_cast<unsigned char>(s[i])))
        ++i;
    return s.substr(i);
}

double to_double(std::string const& s, std::string const& where)
{
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (std::exception const&)
    {
        throw ValidationError(where + ": not a number: '" + s + "'");
    }
    if (trim(s.substr(used)).size() != 0)
        throw ValidationError(where + ": trailing characters in '" + s + "'");
    return v;
}

// Data rows of a CSV with a fixed header, skipping '#' comments.
std::vector<std::vector<double>> read_table(std::string const& path,
                                            std::string const& header,
                                            std::vector<std::string>* comments)
{
    auto f = open_in(path);
    std::string line;
    bool seen_header = false;
    std::vector<std::vector<double>> rows;
    std::size_t width = split(header).size();
    int lineno = 0;
    while (std::getline(f, line))
    {
        ++lineno;
        line = trim(line);
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            if (comments)
                comments->push_back(trim(line.substr(1)));
            continue;
        }
        if (!seen_header)
        {
            if (line != header)
                throw ValidationError(path + ": expected header '" + header + "'");
            seen_header = true;
            continue;
        }
        auto cells = split(line);
        if (cells.size() != width)
            throw ValidationError(path + ":" + std::to_string(lineno)
                                  + ": expected " + std::to_string(width)
                                  + " columns");
        std::vector<double> row;
        for (auto const& c : cells)
            row.push_back(to_double(trim(c), path + ":" + std::to_string(lineno)));
        rows.push_back(std::move(row));
    }
    if (!seen_header)
        throw ValidationError(path + ": missing header '" + header + "'");
    return rows;
}

}  // namespace

void write_fock_csv(std::string const& path, FockVector const& state)
{
    auto f = open_out(path);
    f << "n,re,im\n";
    for (int n = 0; n < state.dim(); ++n)
        f << n << ',' << num(state[n].real()) << ',' << num(state[n].imag()) << '\n';
    finish(f, path);
}

FockVector read_fock_csv(std::string const& path)
{
    auto rows = read_table(path, "n,re,im", nullptr);
    if (rows.empty())
        throw ValidationError(path + ": no amplitudes");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rows.size()));
    for (auto const& r : rows)
    {
        auto n = static_cast<Eigen::Index>(r[0]);
        if (r[0] != static_cast<double>(n) || n < 0 || n >= v.size())
            throw ValidationError(path + ": bad level index");
        v[n] = cplx(r[1], r[2]);
    }
    return FockVector(std::move(v), false);
}

void write_operator_csv(std::string const& path, OperatorMatrix const& op)
{
    auto f = open_out(path);
    f << "# rows = " << op.rows() << "\n# cols = " << op.cols() << "\n";
    f << "row,col,re,im\n";
    for (Eigen::Index j = 0; j < op.cols(); ++j)
        for (Eigen::Index i = 0; i < op.rows(); ++i)
            if (op(i, j) != cplx(0.0, 0.0))
                f << i << ',' << j << ',' << num(op(i, j).real()) << ','
                  << num(op(i, j).imag()) << '\n';
    finish(f, path);
}

OperatorMatrix read_operator_csv(std::string const& path)
{
    std::vector<std::string> comments;
    auto rows = read_table(path, "row,col,re,im", &comments);
    std::map<std::string, double> meta;
    for (auto const& c : comments)
    {
        auto eq = c.find('=');
        if (eq != std::string::npos)
            meta[trim(c.substr(0, eq))] = to_double(trim(c.substr(eq + 1)), path);
    }
    if (!meta.count("rows") || !meta.count("cols"))
        throw ValidationError(path + ": missing rows/cols header");
    OperatorMatrix op = OperatorMatrix::Zero(static_cast<Eigen::Index>(meta["rows"]),
                                             static_cast<Eigen::Index>(meta["cols"]));
    for (auto const& r : rows)
    {
        auto i = static_cast<Eigen::Index>(r[0]);
        auto j = static_cast<Eigen::Index>(r[1]);
        if (i < 0 || j < 0 || i >= op.rows() || j >= op.cols())
            throw ValidationError(path + ": element index out of range");
        op(i, j) = cplx(r[2], r[3]);
    }
    return op;
}

void write_spin_trace(std::string const& path, SpinTrace const& trace)
{
    trace.validate();
    auto f = open_out(path);
    f << "# basis = " << to_string(trace.basis.kind) << '\n'
      << "# beta_re = " << num(trace.basis.beta.real()) << '\n'
      << "# beta_im = " << num(trace.basis.beta.imag()) << '\n'
      << "# r = " << num(trace.basis.r) << '\n'
      << "# phi_s_rad = " << num(trace.basis.phi_s) << '\n'
      << "# omega_probe_rad_s = " << num(trace.omega_probe) << '\n'
      << "t_us,p_down,shots\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        f << num(trace.times[i] * 1e6) << ',' << num(trace.p_down[i]) << ','
          << trace.shots[i] << '\n';
    finish(f, path);
}

SpinTrace read_spin_trace(std::string const& path)
{
    std::vector<std::string> comments;
    auto rows = read_table(path, "t_us,p_down,shots", &comments);
    SpinTrace t;
    std::map<std::string, std::string> meta;
    for (auto const& c : comments)
    {
        auto eq = c.find('=');
        if (eq != std::string::npos)
            meta[trim(c.substr(0, eq))] = trim(c.substr(eq + 1));
    }
    auto get = [&](char const* key, double fallback)
    { return meta.count(key) ? to_double(meta[key], path) : fallback; };
    if (meta.count("basis"))
        t.basis.kind = basis_kind_from_string(meta["basis"]);
    t.basis.beta = cplx(get("beta_re", 0.0), get("beta_im", 0.0));
    t.basis.r = get("r", 0.0);
    t.basis.phi_s = get("phi_s_rad", 0.0);
    t.basis.validate();
    t.omega_probe = get("omega_probe_rad_s", 0.0);
    for (auto const& r : rows)
    {
        t.times.push_back(r[0] * 1e-6);
        t.p_down.push_back(r[1]);
        if (r[2] != std::floor(r[2]))
            throw ValidationError(path + ": shots must be integers");
        t.shots.push_back(static_cast<int>(r[2]));
    }
    if (t.times.empty())
        throw ValidationError(path + ": no data rows");
    t.validate();
    return t;
}

void write_populations_csv(std::string const& path,
                           std::vector<double> const& p,
                           std::vector<double> const& sem)
{
    auto f = open_out(path);
    f << "n,p,sem\n";
    for (std::size_t n = 0; n < p.size(); ++n)
        f << n << ',' << num(p[n]) << ',' << num(n < sem.size() ? sem[n] : 0.0)
          << '\n';
    finish(f, path);
}

std::string estimate_summary(PopulationEstimate const& est)
{
    std::ostringstream s;
    s << "model = populations\n"
      << "basis = " << to_string(est.basis.kind) << '\n'
      << "decay = " << to_string(est.decay_kind) << '\n'
      << "n_levels = " << est.n_levels << '\n'
      << "omega_rad_s = " << num(est.omega) << '\n'
      << "omega_sem_rad_s = " << num(est.omega_sem) << '\n'
      << "gamma = " << num(est.gamma) << '\n'
      << "gamma_sem = " << num(est.gamma_sem) << '\n'
      << "parity = " << num(est.parity) << '\n'
      << "parity_sem = " << num(est.parity_sem) << '\n'
      << "total_population = " << num(est.total()) << '\n'
      << "mean_level = " << num(est.mean_level()) << '\n'
      << "residual_rms = " << num(est.residual_rms) << '\n'
      << "ill_conditioned = " << (est.ill_conditioned ? "true" : "false") << '\n'
      << "stalled = " << (est.stalled ? "true" : "false") << '\n';
    for (auto const& w : est.warnings)
        s << "warning = " << w << '\n';
    s << "report = " << parity_report(est) << '\n';
    return s.str();
}

std::string estimate_summary(MixtureEstimate const& est)
{
    std::ostringstream s;
    s << "model = mixture\n"
      << "alpha_re = " << num(est.alpha_model.real()) << '\n'
      << "alpha_im = " << num(est.alpha_model.imag()) << '\n'
      << "xi_mix = " << num(est.xi_mix) << '\n'
      << "xi_sem = " << num(est.xi_sem) << '\n'
      << "omega_rad_s = " << num(est.omega) << '\n'
      << "gamma = " << num(est.gamma) << '\n'
      << "parity = " << num(est.parity) << '\n'
      << "parity_sem = " << num(est.parity_sem) << '\n'
      << "residual_rms = " << num(est.residual_rms) << '\n'
      << "report = " << parity_report(est) << '\n';
    return s.str();
}

void write_wigner_csv(std::string const& path, WignerGrid const& grid)
{
    auto f = open_out(path);
    f << "# source = " << to_string(grid.source) << '\n'
      << "# W is dimensionless; beta in units of the ground-state extent\n"
      << "re_beta,im_beta,W,sem,valid\n";
    for (auto const& p : grid.points)
        f << num(p.point.real()) << ',' << num(p.point.imag()) << ','
          << (p.valid ? num(p.w) : std::string("nan")) << ',' << num(p.sem) << ','
          << (p.valid ? 1 : 0) << '\n';
    finish(f, path);
}

void write_wigner_pgm(std::string const& path, WignerGrid const& grid)
{
    if (grid.n_re < 1 || grid.n_im < 1
        || grid.points.size()
               != static_cast<std::size_t>(grid.n_re)
                      * static_cast<std::size_t>(grid.n_im))
        throw ValidationError("write_wigner_pgm: grid is not rectangular");
    auto f = open_out(path);
    f << "P2\n# W from -2/pi (0) to +2/pi (255)\n"
      << grid.n_re << ' ' << grid.n_im << "\n255\n";
    double const lim = 2.0 / kPi;
    for (int j = grid.n_im - 1; j >= 0; --j)
    {
        for (int i = 0; i < grid.n_re; ++i)
        {
            auto const& p = grid.points[static_cast<std::size_t>(j * grid.n_re + i)];
            int v = 0;
            if (p.valid)
                v = static_cast<int>(std::lround(
                    255.0 * (std::clamp(p.w, -lim, lim) + lim) / (2.0 * lim)));
            f << v << (i + 1 < grid.n_re ? ' ' : '\n');
        }
    }
    finish(f, path);
}

void write_text(std::string const& path, std::string const& text)
{
    auto f = open_out(path);
    f << text;
    finish(f, path);
}

}  // namespace fockcat
