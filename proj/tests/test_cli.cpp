// Runs the command-line tool as a subprocess and checks exit codes and outputs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>

namespace fs = std::filesystem;

namespace
{
fs::path work_dir()
{
    static fs::path const dir = []
    {
        auto d = fs::temp_directory_path() / "fockcat_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(std::string const& args)
{
    std::string cmd = std::string("\"") + FOCKCAT_CLI + "\" " + args + " > \""
                      + (work_dir() / "stdout.txt").string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(fs::path const& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path write_config(std::string const& name, std::string const& json)
{
    auto p = work_dir() / name;
    std::ofstream(p, std::ios::binary) << json;
    return p;
}

std::string recipe(char const* name)
{
    return (fs::path(FOCKCAT_RECIPE_DIR) / name).string();
}

std::string const kSimulate = R"({
  "schema_version": 1,
  "experiment": "simulate",
  "label": "small",
  "seed": 5,
  "physics": { "alpha": 2.0, "probe_rabi_hz": 31000 },
  "sampling": { "t_end_us": 300, "points": 121, "shots": 250 },
  "sequence": { "traces": [ { "name": "odd", "state": "odd" },
                            { "name": "mix", "state": "mixture", "sideband": "blue" } ] }
})";
}  // namespace

TEST_CASE("report recipe")
{
    auto out = work_dir() / "report";
    REQUIRE(run("report -c \"" + recipe("large_cat_report.json") + "\" --out-dir \""
                + out.string() + "\"")
            == 0);
    auto text = slurp(out / "report.txt");
    CHECK(text.find("[squeezed_basis]") != std::string::npos);
    CHECK(text.find("squeeze_db = 8") != std::string::npos);
}

TEST_CASE("simulate is deterministic and feeds fit")
{
    auto cfg = write_config("sim.json", kSimulate);
    auto a = work_dir() / "sim_a";
    auto b = work_dir() / "sim_b";
    REQUIRE(run("simulate -c \"" + cfg.string() + "\" --out-dir \"" + a.string() + "\"") == 0);
    REQUIRE(run("simulate -c \"" + cfg.string() + "\" --out-dir \"" + b.string()
                + "\" --threads 1")
            == 0);
    for (char const* f : {"odd.csv", "mix.csv", "simulate_summary.txt"})
    {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    auto c = work_dir() / "sim_c";
    REQUIRE(run("simulate -c \"" + cfg.string() + "\" --seed 6 --out-dir \"" + c.string()
                + "\"")
            == 0);
    CHECK(slurp(a / "odd.csv") != slurp(c / "odd.csv"));

    auto fit_cfg = write_config("fit.json", R"({
      "schema_version": 1,
      "experiment": "fit",
      "label": "fit odd",
      "physics": { "alpha": 2.0, "probe_rabi_hz": 31000 },
      "fit": { "truth_state": "odd", "bootstrap": 20 }
    })");
    auto f = work_dir() / "fit";
    REQUIRE(run("fit -c \"" + fit_cfg.string() + "\" -i \"" + (a / "odd.csv").string()
                + "\" --out-dir \"" + f.string() + "\"")
            == 0);
    auto summary = slurp(f / "odd_summary.txt");
    CHECK(summary.find("parity = ") != std::string::npos);
    CHECK(fs::exists(f / "odd_estimate.csv"));
}

TEST_CASE("wigner oracle grid writes csv and image")
{
    auto cfg = write_config("wig.json", R"({
      "schema_version": 1,
      "experiment": "wigner",
      "label": "oracle",
      "physics": { "alpha": 2.1 },
      "wigner": { "source": "oracle", "state": "odd",
                  "grid": { "re_min": -1, "re_max": 1, "n_re": 5,
                            "im_min": -1, "im_max": 1, "n_im": 5 } }
    })");
    auto out = work_dir() / "wig";
    REQUIRE(run("wigner -c \"" + cfg.string() + "\" --out-dir \"" + out.string() + "\"") == 0);
    CHECK(slurp(out / "wigner.pgm").rfind("P2\n", 0) == 0);
    CHECK(slurp(out / "wigner_summary.txt").find("w_nearest_origin = -0.63") != std::string::npos);
}

TEST_CASE("herald sequence runs")
{
    auto cfg = write_config("her.json", R"({
      "schema_version": 1,
      "experiment": "herald",
      "label": "small herald",
      "seed": 2,
      "physics": { "alpha": 1.0 },
      "probe": { "decay": { "kind": "exponential", "gamma": 300 } },
      "sampling": { "t_end_us": 100, "points": 5, "shots": 20 },
      "sequence": { "mcwf_trajectories": 20 }
    })");
    auto out = work_dir() / "her";
    REQUIRE(run("herald -c \"" + cfg.string() + "\" --out-dir \"" + out.string() + "\"") == 0);
    CHECK(slurp(out / "herald_summary.txt").find("acceptance_rate = ") != std::string::npos);
    CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("exit codes")
{
    std::string zero_shots = kSimulate;
    zero_shots.replace(zero_shots.find("\"shots\": 250"), 12, "\"shots\": 0");
    CHECK(run("simulate -c \"" + write_config("zero.json", zero_shots).string() + "\"") == 2);

    auto unknown = write_config("unknown.json", R"({"schema_version": 1, "physcs": {}})");
    CHECK(run("simulate -c \"" + unknown.string() + "\"") == 2);

    CHECK(run("fit -c \"" + write_config("sim2.json", kSimulate).string() + "\"") == 2);
    CHECK(run("simulate -c \"" + (work_dir() / "absent.json").string() + "\"") == 4);
    CHECK(run("") == 2);
    CHECK(run("simulate") == 2);

    auto fit_cfg = write_config("fit_missing.json", R"({"schema_version": 1, "experiment": "fit"})");
    CHECK(run("fit -c \"" + fit_cfg.string() + "\" -i \"" + (work_dir() / "none.csv").string()
              + "\" --out-dir \"" + (work_dir() / "fit_missing").string() + "\"")
          == 4);
    CHECK(run("fit -c \"" + fit_cfg.string() + "\" --out-dir \""
              + (work_dir() / "fit_missing").string() + "\"")
          == 2);
    CHECK(run("--help") == 0);
}
