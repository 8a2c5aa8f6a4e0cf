// Drives the dcvqkd executable end to end.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path config_dir = DCVQKD_CONFIG_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

class Workspace {
public:
    Workspace() {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("dcvqkd_cli_" + std::to_string(rd()));
        fs::create_directories(dir_);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    const fs::path& dir() const { return dir_; }
    fs::path file(const std::string& name) const { return dir_ / name; }

    /// Runs the CLI with stdout/stderr captured to files; returns the exit code.
    int run(const std::string& args) {
        const std::string cmd = std::string("\"") + DCVQKD_CLI + "\" " + args + " > \"" + file("stdout").string() +
                                "\" 2> \"" + file("stderr").string() + "\"";
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        return WEXITSTATUS(status);
    }
    std::string out() const { return slurp(dir_ / "stdout"); }
    std::string err() const { return slurp(dir_ / "stderr"); }

private:
    fs::path dir_;
};

std::string cfg(const std::string& name) { return "\"" + (config_dir / name).string() + "\""; }

/// vac.scn trimmed to a quick run.
std::string quick_vac(const std::string& n_shots = "2000") {
    return replace(slurp(config_dir / "vac.scn"), R"("n_shots": 100000)", "\"n_shots\": " + n_shots);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes CSV and report") {
    Workspace ws;
    REQUIRE(ws.run("simulate --config " + cfg("fig3.scn") + " --out \"" + ws.dir().string() + "\"") == 0);
    const std::string csv = slurp(ws.file("fig3_results.csv"));
    const std::string report = slurp(ws.file("fig3_report.txt"));
    CHECK(csv.rfind("beta2_ps2_per_km,z_km,transmittance,eta_tm,rate_bits_per_symbol", 0) == 0);
    CHECK(csv.find("\r\n") != std::string::npos);
    std::size_t rows = 0;
    for (std::size_t at = 0; (at = csv.find("\r\n", at)) != std::string::npos; at += 2) ++rows;
    CHECK(rows == 1 + 2 * 101);
    CHECK(report.find("cutoff") != std::string::npos);
    CHECK(ws.out().find("wrote") != std::string::npos);
}

TEST_CASE("reruns are byte-identical and thread-invariant") {
    Workspace ws;
    const fs::path a = ws.file("a"), b = ws.file("b"), c = ws.file("c");
    REQUIRE(ws.run("simulate --config " + cfg("offset.scn") + " --out \"" + a.string() + "\"") == 0);
    REQUIRE(ws.run("simulate --config " + cfg("offset.scn") + " --out \"" + b.string() + "\"") == 0);
    REQUIRE(ws.run("simulate --config " + cfg("offset.scn") + " --threads 3 --out \"" + c.string() + "\"") == 0);
    for (const char* f : {"offset_results.csv", "offset_report.txt"}) {
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(slurp(a / f) == slurp(c / f));
    }
    spit(ws.file("vac.scn"), quick_vac());
    REQUIRE(ws.run("calibrate --config \"" + ws.file("vac.scn").string() + "\" --threads 1 --out \"" + a.string() + "\"") == 0);
    REQUIRE(ws.run("calibrate --config \"" + ws.file("vac.scn").string() + "\" --threads 2 --out \"" + b.string() + "\"") == 0);
    CHECK(slurp(a / "vac_results.csv") == slurp(b / "vac_results.csv"));
}

TEST_CASE("--seed overrides the scenario seed") {
    Workspace ws;
    spit(ws.file("vac.scn"), quick_vac());
    const std::string base = "calibrate --config \"" + ws.file("vac.scn").string() + "\" --out ";
    REQUIRE(ws.run(base + "\"" + ws.file("s5").string() + "\" --seed 5") == 0);
    REQUIRE(ws.run(base + "\"" + ws.file("s6").string() + "\" --seed 6") == 0);
    REQUIRE(ws.run(base + "\"" + ws.file("d").string() + "\"") == 0);
    const std::string s5 = slurp(ws.file("s5") / "vac_results.csv");
    CHECK(s5 != slurp(ws.file("s6") / "vac_results.csv"));
    CHECK(s5.find(",5,") != std::string::npos);
    CHECK(slurp(ws.file("d") / "vac_results.csv").find(",20240611,") != std::string::npos);
}

TEST_CASE("compare-kernels ranks the matched kernel first") {
    Workspace ws;
    REQUIRE(ws.run("compare-kernels --config " + cfg("kernels.scn") + " --out \"" + ws.dir().string() + "\"") == 0);
    const std::string csv = slurp(ws.file("kernels_results.csv"));
    CHECK(csv.find("1,matched-weighted-average,") != std::string::npos);
    CHECK(csv.find("3,single-point,") != std::string::npos);
}

TEST_CASE("sweep over the sampling offset") {
    Workspace ws;
    REQUIRE(ws.run("sweep --config " + cfg("offset.scn") + " --out \"" + ws.dir().string() + "\"") == 0);
    CHECK(fs::exists(ws.file("offset_results.csv")));
    CHECK(slurp(ws.file("offset_report.txt")).find("curvature") != std::string::npos);
}

TEST_CASE("validation failures exit with 2") {
    Workspace ws;
    CHECK(ws.run("simulate") == 2);
    CHECK(ws.run("simulate --config \"" + ws.file("nope.scn").string() + "\"") == 2);
    CHECK(ws.run("launch --config " + cfg("fig3.scn")) == 2);
    CHECK(ws.run("simulate --config " + cfg("fig3.scn") + " --threads many") == 2);

    spit(ws.file("broken.scn"), "{ \"schema\": 1, \"name\": ");
    CHECK(ws.run("simulate --config \"" + ws.file("broken.scn").string() + "\"") == 2);
    CHECK(ws.err().find("line") != std::string::npos);

    const std::string fig3 = slurp(config_dir / "fig3.scn");
    spit(ws.file("noirf.scn"), replace(fig3, R"("irf": { "kind": "gaussian_irf", "fwhm_ps": 28.2842712475 },)", R"("irf": {},)"));
    CHECK(ws.run("simulate --config \"" + ws.file("noirf.scn").string() + "\"") == 2);
    CHECK(ws.err().find("missing field: receiver.irf.kind") != std::string::npos);

    spit(ws.file("neg.scn"), replace(fig3, R"("V_A": 4.0)", R"("V_A": -1.0)"));
    CHECK(ws.run("simulate --config \"" + ws.file("neg.scn").string() + "\" --out \"" + ws.dir().string() + "\"") == 2);

    const std::string kernels = slurp(config_dir / "kernels.scn");
    const auto open = kernels.find("\"kernels\": [");
    const auto close = kernels.find(']', kernels.find("matched-weighted-average"));
    spit(ws.file("nokernels.scn"), kernels.substr(0, open) + "\"kernels\": []" + kernels.substr(close + 1));
    CHECK(ws.run("compare-kernels --config \"" + ws.file("nokernels.scn").string() + "\" --out \"" +
                 ws.dir().string() + "\"") == 2);
}

TEST_CASE("physics failures exit with 3") {
    Workspace ws;
    // Miscalibrated shot noise is a failed physics check.
    spit(ws.file("raw.scn"), replace(quick_vac("20000"), R"("mode": "same_dsp")", R"("mode": "raw_samples")"));
    CHECK(ws.run("calibrate --config \"" + ws.file("raw.scn").string() + "\" --out \"" + ws.dir().string() + "\"") == 3);
    CHECK(slurp(ws.file("vac_results.csv")).find(",0\r\n") != std::string::npos);

    // A 50 ps window cannot hold the pulse.
    const std::string fig3 = slurp(config_dir / "fig3.scn");
    spit(ws.file("narrow.scn"), replace(fig3, R"("n": 3000)", R"("n": 100)"));
    CHECK(ws.run("simulate --config \"" + ws.file("narrow.scn").string() + "\" --out \"" + ws.dir().string() + "\"") == 3);
    CHECK(ws.err().find("TruncationError") != std::string::npos);
}

} // TEST_SUITE
