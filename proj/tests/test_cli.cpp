#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "motifcast/config.hpp"
#include "motifcast/data.hpp"
#include "motifcast/io.hpp"
#include "motifcast/roadgraph.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_dir;

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buffer[512];
    while (fgets(buffer, sizeof(buffer), pipe) != nullptr) output += buffer;
    const int status = pclose(pipe);
    return RunResult{WEXITSTATUS(status), output};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 4-segment toy world shared by the heavier commands.
void write_toy_world(const fs::path& dir) {
    write_file(dir / "graph.edges", "0,1\n1,2\n2,3\n3,0\n0,2\n1,3\n");
    motifcast::data::SyntheticSpec spec;
    spec.segment_count = 4;
    spec.days = 8;
    spec.intervals_per_day = 24;
    spec.daily_profile.assign(24, 45.0);
    for (int t = 7; t < 11; ++t) spec.daily_profile[static_cast<std::size_t>(t)] = 30.0;
    spec.spatial_coupling = 0.2;
    spec.noise_phi = 0.4;
    spec.noise_sigma = 1.5;
    spec.seed = 11;
    motifcast::io::save_synthetic_spec(spec, dir / "spec.json");

    motifcast::cli::RunConfig config;
    config.pipeline.level = 2;
    config.pipeline.trend_window = 2;
    config.pipeline.period_window = 1;
    config.pipeline.training_days = 6;
    config.pipeline.shape.cheb_order = 2;
    config.pipeline.shape.mgc_filters = 3;
    config.pipeline.shape.lstm_hidden = 6;
    config.pipeline.train.epochs = 3;
    config.pipeline.train.batch_size = 8;
    config.pipeline.train.seed = 5;
    config.pipeline.arma_max_p = 1;
    config.pipeline.arma_max_q = 1;
    config.save(dir / "config.json");
}

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("ingest").exit_code == 1);  // missing required options
    const RunResult help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("ingest") != std::string::npos);
}

TEST_CASE("cli: ingest") {
    const fs::path dir = g_dir / "ingest";
    fs::create_directories(dir);
    write_file(dir / "graph.edges", "0,1\n1,0\n");

    SUBCASE("valid records produce a matrix with the expected cells") {
        write_file(dir / "records.csv",
                   "timestamp,segment_id,speed_kmh\n"
                   "2024-03-01T00:02:00,0,30\n"
                   "2024-03-01T00:11:00,0,50\n"
                   "2024-03-01T01:00:00,1,25\n");
        const RunResult r = run_cli("ingest --records " + (dir / "records.csv").string() +
                                    " --graph " + (dir / "graph.edges").string() + " --out " +
                                    (dir / "out").string());
        CHECK(r.exit_code == 0);
        const auto matrix = motifcast::io::load_speed_matrix(dir / "out" / "speeds.csv");
        CHECK(matrix.values(0, 0) == doctest::Approx(40.0));
        CHECK(matrix.values(1, 4) == doctest::Approx(25.0));
    }
    SUBCASE("malformed row names the line") {
        write_file(dir / "bad.csv", "2024-03-01T00:02:00,0,30\nthis-is-not-a-record\n");
        const RunResult r = run_cli("ingest --records " + (dir / "bad.csv").string() +
                                    " --graph " + (dir / "graph.edges").string() + " --out " +
                                    (dir / "out2").string());
        CHECK(r.exit_code == 2);
        CHECK(r.output.find(":2") != std::string::npos);
    }
    SUBCASE("empty records file") {
        write_file(dir / "empty.csv", "");
        const RunResult r = run_cli("ingest --records " + (dir / "empty.csv").string() +
                                    " --graph " + (dir / "graph.edges").string() + " --out " +
                                    (dir / "out3").string());
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("no records") != std::string::npos);
    }
}

TEST_CASE("cli: synth is deterministic and validates the spec") {
    const fs::path dir = g_dir / "synth";
    fs::create_directories(dir);
    write_toy_world(dir);

    const std::string cmd = "synth --spec " + (dir / "spec.json").string() + " --graph " +
                            (dir / "graph.edges").string();
    CHECK(run_cli(cmd + " --out " + (dir / "a").string()).exit_code == 0);
    CHECK(run_cli(cmd + " --out " + (dir / "b").string()).exit_code == 0);
    CHECK(read_file(dir / "a" / "speeds.csv") == read_file(dir / "b" / "speeds.csv"));

    write_file(dir / "badspec.json", "{\"version\":1,\"segment_count\":4,\"days\":0,"
                                     "\"intervals_per_day\":24,\"daily_profile\":[],"
                                     "\"spatial_coupling\":0,\"noise_phi\":0,"
                                     "\"noise_sigma\":0,\"seed\":1}");
    const RunResult bad = run_cli("synth --spec " + (dir / "badspec.json").string() + " --graph " +
                                  (dir / "graph.edges").string() + " --out " +
                                  (dir / "c").string());
    CHECK(bad.exit_code == 2);

    const RunResult missing = run_cli(
        "synth --spec " + (dir / "spec.json").string() + " --graph /no/such/file --out " +
        (dir / "d").string());
    CHECK(missing.exit_code == 2);
}

TEST_CASE("cli: decompose writes level+1 band files and verifies additivity") {
    const fs::path dir = g_dir / "decompose";
    fs::create_directories(dir);
    write_toy_world(dir);
    REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --graph " +
                    (dir / "graph.edges").string() + " --out " + dir.string())
                .exit_code == 0);

    const RunResult r = run_cli("decompose --matrix " + (dir / "speeds.csv").string() +
                                " --config " + (dir / "config.json").string() + " --out " +
                                (dir / "bands").string() + " --verify");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "bands" / "band_rA2.csv"));
    CHECK(fs::exists(dir / "bands" / "band_rD1.csv"));
    CHECK(fs::exists(dir / "bands" / "band_rD2.csv"));
    CHECK_FALSE(fs::exists(dir / "bands" / "band_rD3.csv"));

    // A matrix shorter than 2^level is rejected.
    motifcast::pipeline::SpeedMatrix tiny;
    tiny.values = Eigen::MatrixXd::Constant(1, 3, 20.0);
    tiny.missing = motifcast::pipeline::BoolMask::Constant(1, 3, false);
    tiny.segment_ids = {"0"};
    tiny.start_timestamp = "2024-01-01T00:00:00";
    motifcast::io::save_speed_matrix(tiny, dir / "tiny.csv");
    const RunResult shortrun = run_cli("decompose --matrix " + (dir / "tiny.csv").string() +
                                       " --out " + (dir / "bands2").string());
    CHECK(shortrun.exit_code == 2);
}

TEST_CASE("cli: train / predict / evaluate round trip") {
    const fs::path dir = g_dir / "train";
    fs::create_directories(dir);
    write_toy_world(dir);
    REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --graph " +
                    (dir / "graph.edges").string() + " --out " + dir.string())
                .exit_code == 0);

    const std::string train_cmd = "train --matrix " + (dir / "speeds.csv").string() +
                                  " --graph " + (dir / "graph.edges").string() + " --config " +
                                  (dir / "config.json").string();
    REQUIRE(run_cli(train_cmd + " --out " + (dir / "run1").string()).exit_code == 0);
    REQUIRE(run_cli(train_cmd + " --out " + (dir / "run2").string()).exit_code == 0);
    CHECK(read_file(dir / "run1" / "checkpoint.bin") == read_file(dir / "run2" / "checkpoint.bin"));
    CHECK(read_file(dir / "run1" / "arma_models.json") ==
          read_file(dir / "run2" / "arma_models.json"));
    CHECK(fs::exists(dir / "run1" / "loss_history.csv"));

    const RunResult predict = run_cli(
        "predict --matrix " + (dir / "speeds.csv").string() + " --checkpoint " +
        (dir / "run1" / "checkpoint.bin").string() + " --arma " +
        (dir / "run1" / "arma_models.json").string() + " --config " +
        (dir / "config.json").string() + " --out " + (dir / "pred").string());
    CHECK(predict.exit_code == 0);
    CHECK(fs::exists(dir / "pred" / "predictions.csv"));

    const RunResult evaluate = run_cli("evaluate --predictions " +
                                       (dir / "pred" / "predictions.csv").string() + " --out " +
                                       (dir / "eval").string());
    CHECK(evaluate.exit_code == 0);
    CHECK(fs::exists(dir / "eval" / "report.json"));

    // Perfect predictions score zero on all three metrics.
    auto perfect = motifcast::io::load_predictions_csv(dir / "pred" / "predictions.csv");
    perfect.predicted = perfect.actual;
    motifcast::io::save_predictions_csv(perfect, {"0", "1", "2", "3"}, dir / "perfect.csv");
    const RunResult zero = run_cli("evaluate --predictions " + (dir / "perfect.csv").string() +
                                   " --out " + (dir / "eval0").string());
    CHECK(zero.exit_code == 0);
    CHECK(zero.output.find("MAE 0 ") != std::string::npos);
}

TEST_CASE("cli: baseline and sweep") {
    const fs::path dir = g_dir / "sweep";
    fs::create_directories(dir);
    write_toy_world(dir);
    REQUIRE(run_cli("synth --spec " + (dir / "spec.json").string() + " --graph " +
                    (dir / "graph.edges").string() + " --out " + dir.string())
                .exit_code == 0);

    const RunResult base = run_cli("baseline --kind persistence --matrix " +
                                   (dir / "speeds.csv").string() + " --config " +
                                   (dir / "config.json").string() + " --out " +
                                   (dir / "base").string());
    CHECK(base.exit_code == 0);
    CHECK(fs::exists(dir / "base" / "persistence_report.json"));

    const RunResult sweep = run_cli("sweep --axis K --values 1,2,3,4,5 --matrix " +
                                    (dir / "speeds.csv").string() + " --graph " +
                                    (dir / "graph.edges").string() + " --config " +
                                    (dir / "config.json").string() + " --out " +
                                    (dir / "sw").string());
    CHECK(sweep.exit_code == 0);
    const std::string csv = read_file(dir / "sw" / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows

    const RunResult out_of_range = run_cli("sweep --axis K --values 9 --matrix " +
                                           (dir / "speeds.csv").string() + " --graph " +
                                           (dir / "graph.edges").string() + " --out " +
                                           (dir / "sw2").string());
    CHECK(out_of_range.exit_code == 1);
}

TEST_CASE("cli: unknown config keys are rejected") {
    const fs::path dir = g_dir / "config";
    fs::create_directories(dir);
    write_file(dir / "bad.json", "{\"version\":1,\"modell\":{}}");
    write_toy_world(dir);
    const RunResult r = run_cli("decompose --matrix nosuch.csv --config " +
                                (dir / "bad.json").string() + " --out " + (dir / "o").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("modell") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-motifcast-binary> [doctest args]\n");
        return 1;
    }
    g_binary = argv[1];
    g_dir = fs::temp_directory_path() / "motifcast_cli_tests";
    std::error_code ec;
    fs::remove_all(g_dir, ec);
    fs::create_directories(g_dir);

    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}
