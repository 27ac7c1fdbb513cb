#include "hcg/discriminator.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <string>

namespace {

const std::string kCli = HCG_CLI_PATH;

int run_cli(const std::string& args) {
    std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("cli exit codes: usage 1, data errors 2, success 0") {
    CHECK(run_cli("") == 1);                   // no arguments: usage
    CHECK(run_cli("frobnicate") == 1);         // unknown subcommand
    CHECK(run_cli("evaluate") == 1);           // missing required options
    CHECK(run_cli("--help") == 0);

    auto dir = testutil::make_temp_dir("cli_err");
    CHECK(run_cli("evaluate --manifest " + (dir / "missing.json").string() + " --out " +
                  (dir / "r.json").string()) == 2);
}

TEST_CASE("calibrate on a planted dataset writes the planted thresholds") {
    auto dir = testutil::make_temp_dir("cli_planted");
    REQUIRE(run_cli("synth-gen --out " + dir.string() + " --seed 42 --images 300 --planted") == 0);
    std::string manifest = (dir / "manifest.json").string();
    std::string thresholds = (dir / "thresholds.json").string();
    REQUIRE(run_cli("calibrate --manifest " + manifest + " --out " + thresholds) == 0);

    hcg::ThresholdSet t = hcg::load_thresholds(thresholds);
    CHECK(t.tau_n == 2);
    CHECK(t.tau_a == doctest::Approx(0.31).epsilon(1e-9));
    CHECK(t.tau_s == doctest::Approx(0.10).epsilon(1e-9));

    // The discriminator run over the same data reproduces the trace labels.
    std::string disc = (dir / "disc.jsonl").string();
    REQUIRE(run_cli("discriminate --manifest " + manifest + " --thresholds " + thresholds +
                    " --out " + disc) == 0);
    std::string labels = (dir / "labels.jsonl").string();
    REQUIRE(run_cli("label-cases --manifest " + manifest + " --out " + labels) == 0);

    auto read_labels = [](const std::string& path) {
        std::map<std::string, std::string> out;
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line);
            out[j.at("image_id").get<std::string>()] = j.at("label").get<std::string>();
        }
        return out;
    };
    auto predicted = read_labels(disc);
    auto truth = read_labels(labels);
    REQUIRE(predicted.size() == truth.size());
    long agree = 0;
    for (const auto& [id, label] : truth) {
        if (predicted.at(id) == label) ++agree;
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(truth.size()) >= 0.95);
}

TEST_CASE("simulate supports score-based routing at a target ratio") {
    auto dir = testutil::make_temp_dir("cli_ratio");
    REQUIRE(run_cli("synth-gen --out " + dir.string() + " --seed 9 --images 100") == 0);
    std::string manifest = (dir / "manifest.json").string();

    std::ofstream((dir / "channel.json").string())
        << R"({"bandwidth_bytes_per_s":1e6,"rtt_s":0.05,"edge_infer_s":0.03,)"
        << R"("cloud_infer_s":0.02,"bytes_per_image":1000})";

    std::string out = (dir / "sim.json").string();
    REQUIRE(run_cli("simulate --manifest " + manifest + " --method random --seed 3 --ratio 0.25" +
                    " --channel " + (dir / "channel.json").string() + " --out " + out) == 0);
    std::ifstream in(out);
    auto j = nlohmann::json::parse(in);
    CHECK(j.at("report").at("upload_ratio").get<double>() == 0.25);
    CHECK(j.at("uploaded_bytes").get<long long>() == 25 * 1000);

    // --ratio without --method is rejected as usage misuse (data error code).
    CHECK(run_cli("simulate --manifest " + manifest + " --thresholds none --ratio 0.5 --channel " +
                  (dir / "channel.json").string() + " --out " + out) == 2);
}
