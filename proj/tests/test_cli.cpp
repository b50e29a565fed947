// End-to-end checks of the command-line tool; the binary path arrives in
// the OPTNET_CLI environment variable.
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("OPTNET_CLI");
    REQUIRE_MESSAGE(env != nullptr, "OPTNET_CLI must point at the built binary");
    return env;
}

int run(const std::string& args) {
    const std::string command = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run("") == 1);
    CHECK(run("study --no-such-flag") == 1);
    CHECK(run("verify --check nonsense") == 1);
    CHECK(run("emit --study missing.json --out x.csv") == 1);
}

TEST_CASE("help exits cleanly") {
    CHECK(run("--help") == 0);
    CHECK(run("study --help") == 0);
}

TEST_CASE("mills verification writes its report and exits 0") {
    TempDir dir("optnet_cli_mills");
    CHECK(run("verify --check mills --out " + dir.path.string()) == 0);
    CHECK(fs::exists(dir.path / "config.txt"));
    const std::string csv = slurp(dir.path / "reports" / "mills.csv");
    CHECK(csv.rfind("check,point,lhs,rhs,slack", 0) == 0);
}

TEST_CASE("sigmoid-difference verification passes") {
    TempDir dir("optnet_cli_lemma");
    CHECK(run("verify --check lemma3 --out " + dir.path.string()) == 0);
    CHECK(fs::exists(dir.path / "reports" / "sigmoid_difference.csv"));
}

TEST_CASE("study runs are byte-identical across reruns and job counts") {
    TempDir a("optnet_cli_study_a"), b("optnet_cli_study_b"), c("optnet_cli_study_c");
    const std::string flags = "study --activation sigmoid --trials 2 --epochs 3 --seed 7 ";
    CHECK(run(flags + "--jobs 1 --out " + a.path.string()) == 0);
    CHECK(run(flags + "--jobs 1 --out " + b.path.string()) == 0);
    CHECK(run(flags + "--jobs 4 --out " + c.path.string()) == 0);

    const std::string curves_a = slurp(a.path / "curves.csv");
    CHECK(curves_a == slurp(b.path / "curves.csv"));
    CHECK(curves_a == slurp(c.path / "curves.csv"));
    CHECK(slurp(a.path / "config.txt") == slurp(b.path / "config.txt"));
    CHECK(curves_a.rfind("epoch,model,role,mse,log10_mse,stddev", 0) == 0);
}

TEST_CASE("emit reproduces the curves from the snapshot") {
    TempDir dir("optnet_cli_emit");
    const std::string flags = "study --trials 1 --epochs 2 --seed 9 --out ";
    CHECK(run(flags + dir.path.string()) == 0);
    const fs::path copy = dir.path / "again.csv";
    CHECK(run("emit --study " + dir.path.string() + " --out " + copy.string()) == 0);
    CHECK(slurp(dir.path / "curves.csv") == slurp(copy));
}

TEST_CASE("simulate writes the dataset family") {
    TempDir dir("optnet_cli_sim");
    CHECK(run("simulate --seed 5 --out " + dir.path.string()) == 0);
    for (const char* name :
         {"train.csv", "validation.csv", "tail_0.5.csv", "tail_2.0.csv", "expiry.csv"})
        CHECK(fs::exists(dir.path / name));
    const std::string header = slurp(dir.path / "train.csv").substr(0, 24);
    CHECK(header == "s,tau,c_over_k,v_over_k\n");
}

TEST_CASE("ingest splits a fixture file") {
    TempDir dir("optnet_cli_ingest");
    const fs::path bars = dir.path / "bars.csv";
    {
        std::ofstream out(bars);
        out << "timestamp_utc,underlying_close,option_close,strike,expiry_utc\n";
        for (int i = 0; i < 10; ++i)
            out << "2020-01-0" << (i % 9) + 1 << "T10:00:00Z,10" << i
                << ",2.5,100,2020-06-19T16:00:00Z\n";
    }
    const fs::path run_dir = dir.path / "run";
    CHECK(run("ingest --schema marketbar --input " + bars.string() +
              " --r 0.02 --split random:0.8:42 --out " + run_dir.string()) == 0);
    CHECK(run("ingest --schema bogus --input " + bars.string() + " --out x") == 1);
    const std::string train = slurp(run_dir / "train.csv");
    const std::string eval = slurp(run_dir / "validation.csv");
    // 8/2 split, one header line each
    CHECK(std::count(train.begin(), train.end(), '\n') == 9);
    CHECK(std::count(eval.begin(), eval.end(), '\n') == 3);
    CHECK(slurp(run_dir / "report.txt").find("bars dropped (tau > 1): 0") != std::string::npos);
}

TEST_CASE("config file keys are honored and unknown keys rejected") {
    TempDir dir("optnet_cli_config");
    const fs::path cfg = dir.path / "study.cfg";
    {
        std::ofstream out(cfg);
        out << "trials = 1\nepochs = 2\nseed = 7\nout = " << (dir.path / "run").string() << "\n";
    }
    CHECK(run("study --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir.path / "run" / "curves.csv"));

    // command line overrides the file
    CHECK(run("study --config " + cfg.string() + " --out " + (dir.path / "run2").string()) == 0);
    CHECK(fs::exists(dir.path / "run2" / "curves.csv"));

    const fs::path bad = dir.path / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "not_an_option = 3\n";
    }
    CHECK(run("study --config " + bad.string()) == 1);
}
