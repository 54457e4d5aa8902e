#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "mfg/commands.hpp"
#include "mfg/errors.hpp"
#include "mfg/io.hpp"

#include <spdlog/spdlog.h>

#include <sys/wait.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

using namespace mfg;
using namespace mfg::testing;
namespace fs = std::filesystem;

namespace {

int silence = [] {
    spdlog::set_level(spdlog::level::off);
    return 0;
}();

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "mfg_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json base_config()
{
    return json::parse(R"({
      "problem": {"dim": 1, "n": 64, "alpha": 0.5,
                  "potential": {"form": "separable", "kappa": 1.0, "a_cos": [0.5]},
                  "drift": {"sin": [[0.3]]}},
      "seed": 3
    })");
}

fs::path write_config(const fs::path& dir, const json& j)
{
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

cli::CommandOptions options(const fs::path& config, const fs::path& out)
{
    cli::CommandOptions o;
    o.config_path = config.string();
    o.out_dir = out.string();
    return o;
}

std::size_t nthcomma(const std::string& line, int k)
{
    std::size_t pos = std::string::npos;
    for (int i = 0; i < k; ++i) {
        pos = line.find(',', pos + 1);
    }
    return pos;
}

int run_binary(const std::string& args)
{
    const std::string cmd = std::string(MFG_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing is strict")
{
    CHECK_NOTHROW(run_config_from_json(base_config()));

    json unknown = base_config();
    unknown["problem"]["potential"]["kapa"] = 1.0;
    CHECK_THROWS_AS(run_config_from_json(unknown), Error);

    json top = base_config();
    top["solvr"] = json::object();
    CHECK_THROWS_AS(run_config_from_json(top), Error);

    json shape = base_config();
    shape["problem"]["potential"]["a_cos"] = {0.5, 0.1};
    CHECK_THROWS_AS(run_config_from_json(shape), Error);

    json form = base_config();
    form["problem"]["potential"]["form"] = "cubic";
    CHECK_THROWS_AS(run_config_from_json(form), Error);

    json type = base_config();
    type["problem"]["n"] = "sixty-four";
    CHECK_THROWS_AS(run_config_from_json(type), Error);
}

TEST_CASE("resolved config round trip")
{
    const RunConfig cfg = run_config_from_json(base_config());
    const json resolved = to_json(cfg);
    CHECK(resolved["solver"]["tol_residual"] == 1e-10);
    CHECK(resolved["solver"]["continuation"]["initial_step"] == 0.1);
    const RunConfig again = run_config_from_json(resolved);
    CHECK(to_json(again).dump() == resolved.dump());
}

TEST_CASE("field csv round trip")
{
    const fs::path dir = scratch("csv");
    for (int dim : {1, 2}) {
        const GridSpec g = GridSpec::make(dim, 12);
        const Field f = trig_state(g, 0.3, 0.2, 0.7).m;
        const fs::path p = dir / ("f" + std::to_string(dim) + ".csv");
        write_field_csv(f, p.string());
        const Field back = read_field_csv(p.string());
        CHECK(back.grid() == g);
        CHECK(back.data() == f.data());
    }
    std::ofstream(dir / "bad.csv") << "# n=12 dim=1\n1\n2\n";
    CHECK_THROWS_AS(read_field_csv((dir / "bad.csv").string()), Error);
    CHECK_THROWS_AS(read_field_csv((dir / "missing.csv").string()), Error);
}

TEST_CASE("solve on a lambda-independent problem")
{
    const fs::path dir = scratch("trivial");
    json j = base_config();
    j["problem"]["potential"]["a_cos"] = {0.0};
    j["problem"]["drift"] = json::object();
    const fs::path cfg = write_config(dir, j);
    CHECK(cli::cmd_solve(options(cfg, dir / "out")) == cli::exit_ok);
    const Field u = read_field_csv((dir / "out" / "u.csv").string());
    CHECK((u - Field(u.grid(), std::numbers::pi / 4.0)).sup_norm() <= 1e-12);
}

TEST_CASE("alpha outside the admissible range is a config error")
{
    const fs::path dir = scratch("alpha");
    json j = base_config();
    j["problem"]["alpha"] = 1.2;
    const fs::path cfg = write_config(dir, j);
    CHECK(cli::cmd_solve(options(cfg, dir / "out")) == cli::exit_usage);
    CHECK(run_binary("solve --config " + cfg.string() + " --out " + (dir / "out").string()) == 1);
}

TEST_CASE("solve, verify and trace determinism")
{
    const fs::path dir = scratch("generic");
    const fs::path cfg = write_config(dir, base_config());
    REQUIRE(cli::cmd_solve(options(cfg, dir / "a")) == cli::exit_ok);
    for (const char* name : {"trace.json", "u.csv", "m.csv", "resolved_config.json"}) {
        CHECK(fs::exists(dir / "a" / name));
    }
    const json trace = json::parse(slurp(dir / "a" / "trace.json"));
    CHECK(trace["reached_lambda"] == 1.0);
    CHECK(trace["success"] == true);

    // the emitted resolved config reproduces the trace byte for byte
    REQUIRE(cli::cmd_solve(options(dir / "a" / "resolved_config.json", dir / "b")) == cli::exit_ok);
    CHECK(slurp(dir / "a" / "trace.json") == slurp(dir / "b" / "trace.json"));

    cli::CommandOptions v = options(cfg, dir / "verify");
    v.u_path = (dir / "a" / "u.csv").string();
    v.m_path = (dir / "a" / "m.csv").string();
    const std::string u_before = slurp(v.u_path);
    CHECK(cli::cmd_verify(v) == cli::exit_ok);
    CHECK(slurp(v.u_path) == u_before);
    const json diag = json::parse(slurp(dir / "verify" / "diagnostics.json"));
    CHECK(diag["all_pass"] == true);
}

TEST_CASE("verify on the homotopy start and on perturbed fields")
{
    const fs::path dir = scratch("verify");
    const fs::path cfg = write_config(dir, base_config());
    const RunConfig config = load_run_config(cfg.string());
    const State init = exact_initial(config.problem);
    for (const auto& row : cli::verify_state(config, init)) {
        CHECK_MESSAGE(row.pass, row.check);
    }

    REQUIRE(cli::cmd_solve(options(cfg, dir / "sol")) == cli::exit_ok);
    Field u = read_field_csv((dir / "sol" / "u.csv").string());
    u[7] += 1e-3;
    write_field_csv(u, (dir / "u_perturbed.csv").string());
    cli::CommandOptions v = options(cfg, dir / "report");
    v.u_path = (dir / "u_perturbed.csv").string();
    v.m_path = (dir / "sol" / "m.csv").string();
    CHECK(cli::cmd_verify(v) == cli::exit_failure);
    const json diag = json::parse(slurp(dir / "report" / "diagnostics.json"));
    bool not_a_solution = false;
    for (const auto& row : diag["checks"]) {
        if (row["check"].get<std::string>().starts_with("magic_identity")) {
            not_a_solution = not_a_solution
                             || (!row["pass"].get<bool>()
                                 && row["note"].get<std::string>().find("NotASolution") != std::string::npos);
        }
    }
    CHECK(not_a_solution);

    // grid mismatch between fields and config
    write_field_csv(Field(GridSpec::make(1, 32), 1.0), (dir / "small.csv").string());
    v.u_path = (dir / "small.csv").string();
    v.m_path = (dir / "small.csv").string();
    CHECK(cli::cmd_verify(v) == cli::exit_usage);
}

TEST_CASE("stalled continuation exits with a numerical failure")
{
    const fs::path dir = scratch("stall");
    json j = base_config();
    j["solver"] = {{"max_iters", 1}, {"tol_residual", 1e-14}, {"continuation", {{"min_step", 0.01}}}};
    const fs::path cfg = write_config(dir, j);
    CHECK(cli::cmd_solve(options(cfg, dir / "out")) == cli::exit_failure);
    const json trace = json::parse(slurp(dir / "out" / "trace.json"));
    CHECK(trace["success"] == false);
    CHECK(!trace["rejected"].empty());
}

TEST_CASE("jacobian check with matrix dump")
{
    const fs::path dir = scratch("jac");
    const fs::path cfg = write_config(dir, base_config());
    cli::CommandOptions o = options(cfg, dir / "out");
    o.dump_matrix = true;
    CHECK(cli::cmd_jacobian_check(o) == cli::exit_ok);
    const json report = json::parse(slurp(dir / "out" / "jacobian_check.json"));
    CHECK(report["all_pass"] == true);
    CHECK(report["states"].size() == 3);
    for (const auto& s : report["states"]) {
        CHECK(s["max_relative_error"].get<double>() <= 1e-6);
        CHECK(s["fd_directions"] == 20);
    }
    CHECK(fs::exists(dir / "out" / "jacobian_converged.mtx"));
}

TEST_CASE("mms command writes the rate table")
{
    const fs::path dir = scratch("mms");
    json j = base_config();
    j["mms"] = json::parse(R"({
      "u_exact": {"modes": [{"k": [1, 0], "sin": 0.1}]},
      "m_exact": {"constant": 1.0, "modes": [{"k": [1, 0], "cos": 0.5}]},
      "grids": [32, 64, 128]
    })");
    const fs::path cfg = write_config(dir, j);
    REQUIRE(cli::cmd_mms(options(cfg, dir / "out")) == cli::exit_ok);
    std::ifstream in(dir / "out" / "mms_rates.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "grid,error_u,error_m,rate_u,rate_m");
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        ++rows;
        if (rows > 1) {
            const double rate_u = std::stod(line.substr(nthcomma(line, 3) + 1));
            CHECK(rate_u >= 1.8);
            CHECK(rate_u <= 2.2);
        }
    }
    CHECK(rows == 3);
}

TEST_CASE("sweep is independent of the worker count")
{
    const fs::path dir = scratch("sweep");
    json j = base_config();
    j["sweep"] = {{"alpha", {0.0, 0.5, 0.9}}, {"kappa", {0.5, 1.0}}};
    const fs::path cfg = write_config(dir, j);
    cli::CommandOptions one = options(cfg, dir / "one");
    one.jobs = 1;
    cli::CommandOptions four = options(cfg, dir / "four");
    four.jobs = 4;
    CHECK(cli::cmd_sweep(one) == cli::exit_ok);
    CHECK(cli::cmd_sweep(four) == cli::exit_ok);
    const std::string a = slurp(dir / "one" / "sweep.csv");
    CHECK(a == slurp(dir / "four" / "sweep.csv"));
    CHECK(a.starts_with("alpha,kappa,drift_amplitude,min_m,sup_u,iterations,success"));
    CHECK(std::count(a.begin(), a.end(), '\n') == 7);
}

TEST_CASE("command line surface")
{
    const fs::path dir = scratch("binary");
    const fs::path cfg = write_config(dir, base_config());
    CHECK(run_binary("") == 1);
    CHECK(run_binary("solve") == 1);
    CHECK(run_binary("frobnicate --config " + cfg.string()) == 1);
    CHECK(run_binary("solve --config " + cfg.string() + " --out " + (dir / "out").string() + " --seed 9") == 0);
    const json resolved = json::parse(slurp(dir / "out" / "resolved_config.json"));
    CHECK(resolved["seed"] == 9);
    CHECK(run_binary("verify --config " + cfg.string() + " --out " + (dir / "v").string() + " --u "
                     + (dir / "out" / "u.csv").string() + " --m " + (dir / "out" / "m.csv").string())
          == 0);
    CHECK(run_binary("--help") == 0);
}
