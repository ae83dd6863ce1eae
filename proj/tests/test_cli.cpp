#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "cslab/cli.hpp"

using namespace cslab;

namespace {

int run_binary(const std::string& args) {
    const std::string cmd = std::string(CSLAB_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
}

}  // namespace

TEST_CASE("phase command line from the documentation parses fully") {
    RunConfig cfg = parse_config({"phase", "--ensemble", "gaussian", "-N", "256", "-K", "64",
                                  "--sparsity", "2..24..2", "--trials", "100", "--seed", "7", "-o",
                                  "out.csv"});
    REQUIRE(cfg.command == Command::phase);
    REQUIRE(cfg.n == 256);
    REQUIRE(cfg.k_values == std::vector<std::size_t>{64});
    REQUIRE(cfg.sparsities == std::vector<std::size_t>{2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24});
    REQUIRE(cfg.trials == 100);
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.output == "out.csv");
    REQUIRE(cfg.echo["N"] == 256);
}

TEST_CASE("missing arguments raise usage errors") {
    REQUIRE_THROWS_AS(parse_config({}), UsageError);
    REQUIRE_THROWS_AS(parse_config({"phase", "--ensemble", "gaussian", "-K", "8", "--sparsity", "1"}),
                      UsageError);
    REQUIRE_THROWS_AS(parse_config({"phase", "--ensemble", "gaussian", "-N", "0", "-K", "8",
                                    "--sparsity", "1"}),
                      UsageError);
    REQUIRE_THROWS_AS(parse_config({"phase", "--ensemble", "nonsense", "-N", "16", "-K", "8",
                                    "--sparsity", "1"}),
                      UsageError);
    REQUIRE_THROWS_AS(parse_config({"bogus-command"}), UsageError);
    REQUIRE_THROWS_AS(parse_config({"audit-uup", "--ensemble", "gaussian", "-N", "16", "-K", "32"}),
                      UsageError);
}

TEST_CASE("config file values are overridden by flags and unknown keys rejected") {
    const std::string cfg_path = "/tmp/cslab_test_config.ini";
    {
        std::ofstream os(cfg_path);
        os << "ensemble=binary\n"
           << "signal-length=32\n"
           << "measurements-count=8\n"
           << "sparsity=1..2..1\n"
           << "trials=5\n";
    }
    RunConfig cfg = parse_config({"phase", "--config", cfg_path, "--trials", "9"});
    REQUIRE(cfg.ensemble == "binary");
    REQUIRE(cfg.n == 32);
    REQUIRE(cfg.sparsities == std::vector<std::size_t>{1, 2});
    REQUIRE(cfg.trials == 9);  // flag wins over the file

    {
        std::ofstream os(cfg_path);
        os << "no-such-key=1\n";
    }
    REQUIRE_THROWS_AS(parse_config({"phase", "--config", cfg_path, "--ensemble", "gaussian", "-N",
                                    "16", "-K", "4", "--sparsity", "1"}),
                      UsageError);
}

TEST_CASE("binary exits with code 2 on usage problems") {
    REQUIRE(run_binary("") == 2);
    REQUIRE(run_binary("phase") == 2);
    REQUIRE(run_binary("phase --ensemble gaussian -N 0 -K 4 --sparsity 1") == 2);
}

TEST_CASE("phase run writes csv and manifest it says it does") {
    const std::string out = "/tmp/cslab_cli_phase.csv";
    const int code = run_binary("phase --ensemble gaussian -N 24 -K 10 --sparsity 1..2..1 "
                                "--trials 3 --seed 5 --out-dir /tmp -o cslab_cli_phase.csv");
    REQUIRE(code == 0);
    std::ifstream csv(out);
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    REQUIRE(header == "cell,statistic,value,stderr");
    std::ifstream manifest(out + ".manifest.json");
    REQUIRE(manifest.good());
    std::stringstream buf;
    buf << manifest.rdbuf();
    auto j = nlohmann::json::parse(buf.str());
    REQUIRE(j["command"] == "phase");
    REQUIRE(j["parameters"]["seed"] == 5);
}

TEST_CASE("recover round-trips a stored instance through files") {
    // store a matrix and measurements, then decode via the binary
    Measurement m = gaussian_ensemble(12, 6, Seed{991, 0});
    auto [f, support] = sparse_signal(12, 1, Seed{991, 1});
    CVector y = measure(m, f);
    {
        std::ofstream os("/tmp/cslab_cli_matrix.bin", std::ios::binary);
        write_matrix_binary(os, m);
    }
    {
        std::ofstream os("/tmp/cslab_cli_y.csv");
        for (const auto& v : y) os << format_double(v.real()) << "\n";
    }
    const int code = run_binary("recover --matrix /tmp/cslab_cli_matrix.bin "
                                "--measurements /tmp/cslab_cli_y.csv --out-dir /tmp -o cslab_cli_fsharp.csv");
    REQUIRE(code == 0);
    std::ifstream fs("/tmp/cslab_cli_fsharp.csv");
    Vector decoded = read_signal_csv(fs);
    REQUIRE(decoded.size() == 12);
    for (std::size_t t = 0; t < 12; ++t) REQUIRE(decoded[t] == Catch::Approx(f[t]).margin(1e-6));
}

TEST_CASE("encode-decode reports distortion and honors drops") {
    auto [f, support] = sparse_signal(32, 2, Seed{992, 0});
    {
        std::ofstream os("/tmp/cslab_cli_signal.csv");
        write_signal_csv(os, f);
    }
    const int code = run_binary("encode-decode --signal /tmp/cslab_cli_signal.csv --ensemble gaussian "
                                "-K 24 --q 0.01 --drop 0.5 --seed 3 --out-dir /tmp -o cslab_cli_codec.csv");
    REQUIRE(code == 0);
    std::ifstream csv("/tmp/cslab_cli_codec.csv");
    std::string line;
    std::getline(csv, line);
    bool saw_distortion = false, saw_received = false;
    while (std::getline(csv, line)) {
        if (line.find("distortion_l2,") != std::string::npos) saw_distortion = true;
        if (line.find("received_measurements,12") != std::string::npos) saw_received = true;
    }
    REQUIRE(saw_distortion);
    REQUIRE(saw_received);
}

TEST_CASE("audit commands run end to end") {
    REQUIRE(run_binary("audit-uup --ensemble gaussian -N 16 -K 8 --alpha 2 --lambda-factor 8 "
                       "--seed 2 --out-dir /tmp -o cslab_cli_uup.csv") == 0);
    std::ifstream summary("/tmp/cslab_cli_uup.csv.summary.json");
    REQUIRE(summary.good());

    REQUIRE(run_binary("audit-erp --ensemble gaussian -N 24 -K 18 --support-size 1 --trials 5 "
                       "--seed 2 --out-dir /tmp -o cslab_cli_erp.csv") == 0);
    REQUIRE(run_binary("audit-werp --ensemble gaussian -N 24 -K 12 --support-size 2 --trials 5 "
                       "--gamma 1.0 --seed 2 --out-dir /tmp -o cslab_cli_werp.csv") == 0);
    REQUIRE(run_binary("concentration --suite omega -N 128 --tau 0.25 --trials 50 "
                       "--seed 2 --out-dir /tmp -o cslab_cli_omega.csv") == 0);
}

TEST_CASE("identical seeds give byte-identical csv at different worker counts") {
    const std::string base = "phase --ensemble fourier -N 32 --tau 0.3 --sparsity 1..3..1 --trials 4 "
                             "--seed 11 --out-dir /tmp -o ";
    REQUIRE(run_binary(base + "cslab_cli_w1.csv --workers 1") == 0);
    REQUIRE(run_binary(base + "cslab_cli_w4.csv --workers 4") == 0);
    std::ifstream a("/tmp/cslab_cli_w1.csv"), b("/tmp/cslab_cli_w4.csv");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    REQUIRE(sa.str() == sb.str());
    REQUIRE(!sa.str().empty());
}
