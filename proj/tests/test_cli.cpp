#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
    const char* p = std::getenv("TRS_CLI");
    REQUIRE_MESSAGE(p != nullptr, "TRS_CLI must point at the built binary");
    return p;
}

int run_cli(const std::string& args, const std::string& capture = "") {
    std::string cmd = "\"" + cli_path() + "\" " + args;
    if (capture.empty())
        cmd += " >/dev/null 2>&1";
    else
        cmd += " >\"" + capture + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path dir;
    TempDir() : dir(fs::temp_directory_path() / "trs_cli_test") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("argument errors exit with status 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("gen --bogus 1") == 2);
    CHECK(run_cli("fit") == 2);  // missing required --in
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("gen --help") == 0);
}

TEST_CASE("invalid requests and missing files map to distinct codes") {
    TempDir tmp;
    CHECK(run_cli("gen --exp 9 --out " + tmp.path("x.dten")) == 2);
    CHECK(run_cli("fit --in " + tmp.path("nonesuch.dten")) == 1);
    CHECK(run_cli("info --in " + tmp.path("nonesuch.dten")) == 1);
}

TEST_CASE("generate inspect fit round trip") {
    TempDir tmp;
    const std::string tensor = tmp.path("t.dten");
    const std::string log = tmp.path("log.txt");

    CHECK(run_cli("gen --exp 1 --N 3 --I 6 --R 2 --seed 3 --out " + tensor) == 0);
    CHECK(fs::exists(tensor));
    CHECK(fs::exists(tmp.path("t_truth.trcr")));

    CHECK(run_cli("info --in " + tensor, log) == 0);
    CHECK(slurp(log).find("dense real tensor 6x6x6") != std::string::npos);
    CHECK(run_cli("info --in " + tmp.path("t_truth.trcr"), log) == 0);
    CHECK(slurp(log).find("core chain") != std::string::npos);

    const std::string cores = tmp.path("cores.trcr");
    CHECK(run_cli("fit --in " + tensor +
                      " --solver tr-als --rank 2 --iters 40 --tol 1e-8 --seed 1 --out " + cores,
                  log) == 0);
    const std::string fit_log = slurp(log);
    CHECK(fit_log.find("best: rel_error=") != std::string::npos);
    CHECK(fs::exists(cores));

    CHECK(run_cli("fit --in " + tensor +
                      " --solver tr-ts-als --rank 2 --m 16 --iters 5 --seed 1 --restarts 2",
                  log) == 0);
    CHECK(slurp(log).find("restart 2:") != std::string::npos);
}

TEST_CASE("sparse tensors flow through the sketched solver") {
    TempDir tmp;
    const std::string tensor = tmp.path("s.sptn");
    CHECK(run_cli("gen --exp 2 --N 3 --I 6 --R 2 --density 0.2 --seed 4 --out " + tensor) == 0);
    const std::string log = tmp.path("log.txt");
    CHECK(run_cli("info --in " + tensor, log) == 0);
    CHECK(slurp(log).find("sparse tensor 6x6x6") != std::string::npos);
    CHECK(run_cli("fit --in " + tensor + " --solver tr-ts-als --rank 2 --m 12 --iters 5") == 0);
}

TEST_CASE("sweeps run from a config file and are reproducible") {
    TempDir tmp;
    const std::string cfg = tmp.path("sweep.cfg");
    {
        std::ofstream out(cfg);
        out << "experiment = 1\nN = 3\nI = 4\nR_true = 2\nR = 2\nseed = 5\n"
               "solvers = tr-als, tr-ts-als\nJ_init = 4\nJ_inc = 4\nJ_fin = 4\n"
               "trials = 1\nprep_M = 2\nprep_eps = 1e-10\nrecord_time = none\n";
    }
    const std::string csv1 = tmp.path("a.csv");
    const std::string csv2 = tmp.path("b.csv");
    CHECK(run_cli("sweep --config " + cfg + " --out " + csv1) == 0);
    CHECK(run_cli("sweep --config " + cfg + " --out " + csv2) == 0);
    const std::string a = slurp(csv1);
    CHECK(a.rfind("solver,m,trial,seed,rel_error,iters,seconds", 0) == 0);
    CHECK(a == slurp(csv2));

    std::ofstream(cfg) << "nonsense = 1\n";
    CHECK(run_cli("sweep --config " + cfg) == 2);
    CHECK(run_cli("sweep --config " + tmp.path("missing.cfg")) == 1);
}

TEST_CASE("structural verification passes") {
    TempDir tmp;
    const std::string log = tmp.path("log.txt");
    CHECK(run_cli("verify --seed 3", log) == 0);
    const std::string text = slurp(log);
    CHECK(text.find("[PASS]") != std::string::npos);
    CHECK(text.find("[FAIL]") == std::string::npos);
    CHECK(text.find("all checks passed") != std::string::npos);
}
