#include <cmath>
#include <random>

#include <doctest.h>

#include "fockcat/errors.hpp"
#include "fockcat/oscillator.hpp"
#include "fockcat/wigner.hpp"

using namespace fockcat;

namespace
{
double const kTwoOverPi = 2.0 / kPi;

FockVector odd_cat(double a)
{
    cplx alpha{a, 0.0};
    return cat_state(alpha, CatParity::odd, default_n_max(alpha));
}

std::vector<cplx> im_axis(double lo, double hi, int n)
{
    std::vector<cplx> pts;
    for (int k = 0; k < n; ++k)
        pts.emplace_back(0.0, lo + (hi - lo) * k / (n - 1));
    return pts;
}

WignerGrid oracle_cut(FockVector const& state, std::vector<cplx> const& pts)
{
    ReconstructionConfig cfg;
    cfg.source = WignerSource::oracle;
    return reconstruct_points(state, pts, cfg);
}
}  // namespace

TEST_CASE("simple Wigner values")
{
    auto vac = fock_state(0, 40);
    auto pops = populations_in_basis(vac, ProbeBasis::displaced({0.0, 0.0}));
    auto w = wigner_point_from_populations(pops);
    CHECK(w.w == doctest::Approx(kTwoOverPi).epsilon(1e-12));
    CHECK(w.point == cplx(0.0, 0.0));

    auto cat = odd_cat(3.0);
    auto wc = wigner_point_from_populations(
        populations_in_basis(cat, ProbeBasis::displaced({0.0, 0.0})));
    CHECK(wc.w == doctest::Approx(-kTwoOverPi).epsilon(1e-9));

    cplx alpha{1.3, -0.7};
    auto coh = coherent_state(alpha, default_n_max(alpha));
    CHECK(wigner_oracle(coh, alpha) == doctest::Approx(kTwoOverPi).epsilon(1e-10));
    CHECK(wigner_oracle(fock_state(1, 40), {0.0, 0.0}) == doctest::Approx(-kTwoOverPi).epsilon(1e-12));

    DensityMatrix rho = coh.amps() * coh.amps().adjoint();
    CHECK(wigner_oracle(rho, alpha) == doctest::Approx(kTwoOverPi).epsilon(1e-10));

    CHECK_THROWS_AS(wigner_point_from_populations(populations_in_basis(vac, ProbeBasis::number())),
                    ValidationError);
}

TEST_CASE("population error propagates to W")
{
    auto vac = fock_state(0, 40);
    auto pops = populations_in_basis(vac, ProbeBasis::displaced({0.5, 0.0}));
    std::vector<double> sem(pops.p.size(), 0.0);
    sem[0] = 0.03;
    sem[1] = 0.04;
    auto w = wigner_point_from_populations(pops, sem);
    CHECK(w.sem == doctest::Approx(kTwoOverPi * 0.05).epsilon(1e-12));
}

TEST_CASE("reconstruction chain equals the oracle")
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
        double phi = 2.0 * kPi * u(gen);
        auto basis = trial % 4 == 0 ? ProbeBasis::displaced(beta)
                                    : ProbeBasis::displaced_squeezed(beta, r, phi);
        auto w = wigner_point_from_populations(populations_in_basis(state, basis));
        CHECK(w.point == basis.effective_point());
        worst = std::max(worst, std::abs(w.w - wigner_oracle(state, w.point)));

        // the inverse map lands on the same point
        cplx back = basis_beta_for_point(basis.effective_point(), basis.r, basis.phi_s);
        CHECK(std::abs(back - beta) < 1e-12);
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("cat grid from the oracle matches the closed form")
{
    cplx alpha{2.1, 0.0};
    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha));
    GridSpec grid{-3.2, 3.2, 17, -2.0, 2.0, 21};
    ReconstructionConfig cfg;
    cfg.source = WignerSource::oracle;
    auto w = reconstruct_grid(cat, grid, cfg);
    REQUIRE(w.points.size() == 17u * 21u);
    CHECK(w.n_re == 17);
    CHECK(w.n_im == 21);
    double worst = 0.0;
    for (auto const& p : w.points)
        worst = std::max(worst, std::abs(p.w - cat_wigner(alpha, CatParity::odd, p.point)));
    CHECK(worst < 1e-8);
    // row-major by Im, then Re
    CHECK(w.points[1].point.real() > w.points[0].point.real());
    CHECK(w.points[17].point.imag() > w.points[0].point.imag());

    cfg.source = WignerSource::simulated;
    auto sim = reconstruct_grid(cat, grid, cfg);
    for (std::size_t k = 0; k < sim.points.size(); ++k)
        CHECK(std::abs(sim.points[k].w - w.points[k].w) < 1e-8);

    // peaks at +-alpha, negative at the origin
    CHECK(cat_wigner(alpha, CatParity::odd, alpha) == doctest::Approx(kTwoOverPi / 2.0).epsilon(1e-3));
    CHECK(cat_wigner(alpha, CatParity::odd, {0.0, 0.0}) < -0.6);
    CHECK(cat_wigner(alpha, CatParity::even, {0.0, 0.0}) > 0.6);

    GridSpec empty{0.0, 1.0, 0, 0.0, 1.0, 3};
    CHECK_THROWS_AS(reconstruct_grid(cat, empty, cfg), ValidationError);
}

TEST_CASE("squeezed-basis cut matches the unsqueezed reconstruction")
{
    auto cat = odd_cat(4.25);
    auto pts = im_axis(-0.8, 0.8, 33);
    ReconstructionConfig plain;
    plain.source = WignerSource::simulated;
    auto ref = reconstruct_points(cat, pts, plain);

    ReconstructionConfig sq = plain;
    sq.r = 0.5;
    sq.phi_s = aligned_squeeze_phase({4.25, 0.0});
    auto w = reconstruct_points(cat, pts, sq);
    for (std::size_t k = 0; k < pts.size(); ++k)
    {
        CHECK(std::abs(w.points[k].point - pts[k]) < 1e-12);
        CHECK(std::abs(w.points[k].w - ref.points[k].w) < 1e-6);
    }
}

TEST_CASE("fringe fit on an ideal odd cat")
{
    auto cat = odd_cat(4.25);
    auto cut = oracle_cut(cat, im_axis(-0.8, 0.8, 65));
    auto fit = fringe_fit(cut, 4.25);
    CHECK(std::abs(fit.alpha / 4.25 - 1.0) < 0.005);
    CHECK(std::abs(fit.a + 1.0) < 0.01);
    CHECK(fit.magnitude() == doctest::Approx(1.0).epsilon(0.01));
    CHECK_FALSE(fit.aliased);
    CHECK(fit.alpha > 0.0);

    // a guess 20% off still lands on the same fringe frequency
    CHECK(fringe_fit(cut, 5.0).alpha == doctest::Approx(fit.alpha).epsilon(1e-6));

    auto report = fringe_report(fit);
    CHECK(report.find("A = -1.00") != std::string::npos);
    CHECK(report.find("|A|") != std::string::npos);

    auto coarse = oracle_cut(cat, im_axis(-0.8, 0.8, 6));
    CHECK(fringe_fit(coarse, 4.25).aliased);
}

TEST_CASE("fringe fit on the mixture")
{
    cplx alpha{4.25, 0.0};
    int n_max = default_n_max(alpha);
    auto plus = coherent_state(alpha, n_max).amps();
    auto minus = coherent_state(-alpha, n_max).amps();
    DensityMatrix rho = 0.5 * (plus * plus.adjoint() + minus * minus.adjoint());
    ReconstructionConfig cfg;
    cfg.source = WignerSource::oracle;
    auto cut = reconstruct_points(rho, im_axis(-0.8, 0.8, 65), cfg);
    auto fit = fringe_fit(cut, 4.25);
    CHECK(fit.magnitude() <= std::max(3.0 * fit.a_err, 1e-9));
}

TEST_CASE("fringe zero crossings")
{
    double const a = 4.25;
    int const n = 4001;
    std::vector<double> zeros;
    double prev_x = -0.5;
    double prev = cat_wigner({a, 0.0}, CatParity::odd, {0.0, prev_x});
    for (int k = 1; k < n; ++k)
    {
        double x = -0.5 + 1.0 * k / (n - 1);
        double w = cat_wigner({a, 0.0}, CatParity::odd, {0.0, x});
        if ((w < 0.0) != (prev < 0.0))
            zeros.push_back(prev_x + (x - prev_x) * prev / (prev - w));
        prev = w;
        prev_x = x;
    }
    REQUIRE(zeros.size() >= 4);
    for (std::size_t k = 1; k < zeros.size(); ++k)
        CHECK(std::abs((zeros[k] - zeros[k - 1]) / (kPi / (4.0 * a)) - 1.0) < 0.01);
}

TEST_CASE("Wigner function is normalized")
{
    auto cat = odd_cat(2.0);
    double const radius = 2.0 + 5.0;
    double const h = 0.25;
    int const m = static_cast<int>(std::round(radius / h));
    double sum = 0.0;
    for (int i = -m; i <= m; ++i)
        for (int j = -m; j <= m; ++j)
        {
            cplx p{i * h, j * h};
            if (std::abs(p) <= radius)
                sum += wigner_oracle(cat, p);
        }
    CHECK(std::abs(sum * h * h - 1.0) < 1e-3);
}

TEST_CASE("squeezed basis is sensitive to the cat phase")
{
    cplx alpha{0.0, 3.0};
    double r = 0.6;
    double aligned = aligned_squeeze_phase(alpha);
    auto coh = coherent_state(alpha, default_n_max(alpha, r));
    auto mean = [&](double phi)
    { return populations_in_basis(coh, ProbeBasis::squeezed(r, phi)).mean_level(); };
    double n0 = mean(aligned);
    double n1 = mean(aligned + 0.5 * kPi);
    double n2 = mean(aligned + kPi);
    double s2 = std::pow(std::sinh(r), 2);
    CHECK(n0 == doctest::Approx(9.0 * std::exp(-2.0 * r) + s2).epsilon(1e-6));
    CHECK(n2 == doctest::Approx(9.0 * std::exp(2.0 * r) + s2).epsilon(1e-6));
    CHECK(n1 > n0 + 2.0);
    CHECK(n1 < n2);

    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha, r));
    double c0 = populations_in_basis(cat, ProbeBasis::squeezed(r, aligned)).mean_level();
    double c1 = populations_in_basis(cat, ProbeBasis::squeezed(r, aligned + 0.5 * kPi)).mean_level();
    CHECK(c1 > c0 + 2.0);
}

TEST_CASE("fitted grid is statistically consistent with the oracle")
{
    cplx alpha{1.5, 0.0};
    auto cat = cat_state(alpha, CatParity::odd, default_n_max(alpha));
    GridSpec grid{-1.5, 1.5, 3, -0.5, 0.5, 3};
    ReconstructionConfig cfg;
    cfg.source = WignerSource::fitted;
    cfg.decay.gamma = 100.0;
    cfg.bootstrap = 30;
    cfg.seed = 3;
    auto w = reconstruct_grid(cat, grid, cfg);
    CHECK(w.failures.empty());
    double ss = 0.0, mean_sem = 0.0;
    for (auto const& p : w.points)
    {
        REQUIRE(p.valid);
        CHECK(std::abs(p.w) <= kTwoOverPi + 3.0 * p.sem);
        double d = p.w - wigner_oracle(cat, p.point);
        ss += d * d;
        mean_sem += p.sem;
    }
    double n = static_cast<double>(w.points.size());
    CHECK(std::sqrt(ss / n) < 3.0 * mean_sem / n);

    auto again = reconstruct_grid(cat, grid, cfg);
    for (std::size_t k = 0; k < w.points.size(); ++k)
        CHECK(again.points[k].w == w.points[k].w);
}

TEST_CASE("configuration checks")
{
    for (auto s : {WignerSource::simulated, WignerSource::fitted, WignerSource::oracle})
        CHECK(wigner_source_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(wigner_source_from_string("guess"), ValidationError);
    ReconstructionConfig cfg;
    cfg.shots = 0;
    CHECK_NOTHROW(cfg.validate());  // shots only matter for fitted data
    cfg.source = WignerSource::fitted;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    GridSpec g{1.0, 0.0, 3, 0.0, 1.0, 3};
    CHECK_THROWS_AS(g.validate(), ValidationError);
    CHECK_THROWS_AS(fringe_fit(WignerGrid{}, 4.0), ValidationError);
}
