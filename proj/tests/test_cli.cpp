// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "autoplan/cli.hpp"
#include "autoplan/episode_log.hpp"
#include "support.hpp"

using namespace autoplan;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "autoplan");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& path) { return read_text_file(path); }

void flip_byte(const std::filesystem::path& path, std::size_t from_end) {
    auto text = slurp(path);
    REQUIRE(text.size() > from_end + 1);
    auto& c = text[text.size() - 1 - from_end];
    c = c == 'x' ? 'y' : 'x';
    write_text_file(path, text);
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("train writes the run directory") {
        testing::TempDir dir("train");
        const auto run = dir / "run";
        const auto r = run_cli({"train", "--backend", "scripted:staged", "--task-type", "heat", "--run-dir", run.string()});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        for (int k = 0; k <= 3; ++k) CHECK(std::filesystem::exists(run / ("plan_v" + std::to_string(k) + ".txt")));
        for (int i = 0; i < 3; ++i) {
            const auto iter = run / ("iter_" + std::to_string(i));
            CHECK(std::filesystem::exists(iter / "episodes.jsonl"));
            CHECK(std::filesystem::exists(iter / "reflections.jsonl"));
        }
        CHECK(read_lines(run / "usage.jsonl").size() == 3);
        const auto manifest = nlohmann::json::parse(slurp(run / "manifest.json"));
        CHECK(manifest["iterations"] == 3);
        CHECK(manifest["plans"].size() == 4);
        CHECK(std::filesystem::exists(run / "environment" / "catalog.jsonl"));
        CHECK_FALSE(std::filesystem::is_empty(run / "cache"));

        const auto again = run_cli({"train", "--backend", "scripted:staged", "--run-dir", run.string()});
        CHECK(again.code == cli::kConfig);
    }

    TEST_CASE("a config without batch_size is rejected naming the field") {
        testing::TempDir dir("cfg");
        write_text_file(dir / "bad.ini", "[optimizer]\niterations = 3\n");
        const auto r = run_cli({"train", "--config", (dir / "bad.ini").string(), "--run-dir", (dir / "run").string()});
        CHECK(r.code == cli::kConfig);
        CHECK(r.err.find("optimizer.batch_size") != std::string::npos);

        write_text_file(dir / "bad2.ini", "[optimizer]\nbatch_size = 4\niterations = 3\n[sampling]\ntrain_top_p = 1.5\n");
        const auto r2 = run_cli({"train", "--config", (dir / "bad2.ini").string()});
        CHECK(r2.code == cli::kConfig);
        CHECK(r2.err.find("sampling.train_top_p") != std::string::npos);

        CHECK(run_cli({"train", "--env", "webshop"}).code == cli::kConfig);
        CHECK(run_cli({"eval", "--backend", "bogus"}).code == cli::kConfig);
    }

    TEST_CASE("config init round-trips through the parser") {
        testing::TempDir dir("init");
        const auto path = dir / "autoplan.ini";
        REQUIRE(run_cli({"config", "init", "--output", path.string()}).code == 0);
        const auto r = run_cli({"train", "--config", path.string(), "--iterations", "1", "--batch-size", "2",
                                "--run-dir", (dir / "run").string()});
        CHECK_MESSAGE(r.code == 0, r.err);
    }

    TEST_CASE("replaying with the same seed gives byte-identical manifests") {
        testing::TempDir dir("seed");
        const auto recorded = dir / "recorded";
        REQUIRE(run_cli({"train", "--backend", "scripted:staged", "--seed", "7", "--run-dir", recorded.string()}).code == 0);
        const auto a = dir / "a";
        const auto b = dir / "b";
        REQUIRE(run_cli({"train", "--backend", "replay:" + recorded.string(), "--seed", "7", "--run-dir", a.string()}).code == 0);
        REQUIRE(run_cli({"train", "--backend", "replay:" + recorded.string(), "--seed", "7", "--run-dir", b.string()}).code == 0);
        CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
        CHECK(slurp(a / "plan_v3.txt") == slurp(recorded / "plan_v3.txt"));
    }

    TEST_CASE("eval prints a table and writes a consistent machine report") {
        testing::TempDir dir("eval");
        const auto report_path = dir / "report.json";
        const auto plain = run_cli({"eval", "--backend", "scripted:oracle", "--task-type", "all", "--report",
                                    report_path.string()});
        REQUIRE_MESSAGE(plain.code == 0, plain.err);
        for (const char* family : {"pick", "light", "clean", "heat", "cool", "pick_two"}) {
            CHECK(plain.out.find(family) != std::string::npos);
        }
        CHECK(plain.out.find("100.0%") != std::string::npos);
        CHECK(plain.out.find("cost/episode") != std::string::npos);

        const auto machine = run_cli({"eval", "--backend", "scripted:oracle", "--task-type", "all", "--format", "machine"});
        REQUIRE(machine.code == 0);
        const auto j = nlohmann::json::parse(machine.out);
        CHECK(j == nlohmann::json::parse(slurp(report_path)));
        CHECK(j["rows"].size() == 6);
        for (const auto& row : j["rows"]) {
            CHECK(row["success_rate"] == 1.0);
            CHECK(row["total"] == 10);
            CHECK(row["cost"].get<double>() > 0.0);
            CHECK(plain.out.find(row["task_type"].get<std::string>()) != std::string::npos);
        }
    }

    TEST_CASE("eval uses the plan file's task type") {
        testing::TempDir dir("plan");
        write_text_file(dir / "plan.txt", "# autoplan plan v1 family=heat\n1. Go to microwave 1 and heat the object.\n");
        const auto r = run_cli({"eval", "--backend", "scripted:staged", "--plan", (dir / "plan.txt").string(),
                                "--format", "machine"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto j = nlohmann::json::parse(r.out);
        REQUIRE(j["rows"].size() == 1);
        CHECK(j["rows"][0]["task_type"] == "heat");
        CHECK(j["overall"]["success_rate"] == 1.0);

        write_text_file(dir / "broken.txt", "no header\n");
        CHECK(run_cli({"eval", "--plan", (dir / "broken.txt").string()}).code == cli::kConfig);
    }

    TEST_CASE("an empty evaluation split is a config error") {
        testing::TempDir dir("empty");
        write_text_file(dir / "c.ini", "[optimizer]\nbatch_size = 4\niterations = 3\n[household]\ntest_per_type = 0\n");
        const auto r = run_cli({"eval", "--config", (dir / "c.ini").string()});
        CHECK(r.code == cli::kConfig);
    }

    TEST_CASE("an unreachable remote backend exits with the backend code") {
        testing::TempDir dir("remote");
        write_text_file(dir / "c.ini",
                        "[optimizer]\nbatch_size = 1\niterations = 1\n[backend]\nkind = remote\n"
                        "endpoint = http://127.0.0.1:1/v1\nmax_attempts = 1\ntimeout_seconds = 2\n");
        const auto train = run_cli({"train", "--config", (dir / "c.ini").string(), "--run-dir", (dir / "run").string()});
        CHECK(train.code == cli::kBackend);
        const auto eval = run_cli({"eval", "--config", (dir / "c.ini").string()});
        CHECK(eval.code == cli::kBackend);
    }

    TEST_CASE("replay reports identical runs and locates tampering") {
        testing::TempDir dir("replay");
        const auto run = dir / "run";
        REQUIRE(run_cli({"train", "--backend", "scripted:staged", "--run-dir", run.string()}).code == 0);
        const auto ok = run_cli({"replay", "--run-dir", run.string()});
        CHECK(ok.code == 0);
        CHECK(ok.out == "identical\n");

        SUBCASE("plan file") {
            flip_byte(run / "plan_v2.txt", 3);
            const auto r = run_cli({"replay", "--run-dir", run.string()});
            CHECK(r.code == cli::kDivergence);
            CHECK(r.out.find("iter_1") != std::string::npos);
            CHECK(r.out.find("plan_v2") != std::string::npos);
        }
        SUBCASE("episode log") {
            auto lines = read_lines(run / "iter_2" / "episodes.jsonl");
            auto episode = nlohmann::json::parse(lines[1]);
            auto& observation = episode["steps"][0]["observation"];
            observation = observation.get<std::string>() + "!";
            lines[1] = episode.dump();
            write_lines(run / "iter_2" / "episodes.jsonl", lines);
            const auto r = run_cli({"replay", "--run-dir", run.string()});
            CHECK(r.code == cli::kDivergence);
            CHECK(r.out.find("iter_2: episode 1") != std::string::npos);
            CHECK(r.out.find("step 0") != std::string::npos);
        }
        SUBCASE("missing cache") {
            std::filesystem::remove_all(run / "cache");
            std::filesystem::create_directories(run / "cache");
            const auto r = run_cli({"replay", "--run-dir", run.string()});
            CHECK(r.code == cli::kDivergence);
            CHECK(r.out.find("replay miss") != std::string::npos);
        }
    }

    TEST_CASE("catalog export") {
        testing::TempDir dir("catalog");
        const auto r = run_cli({"catalog", "export", "--output", (dir / "c.jsonl").string()});
        CHECK(r.code == 0);
        CHECK(read_lines(dir / "c.jsonl").size() == 6 * 34);
    }

    TEST_CASE("the installed binary speaks the same interface") {
        const std::string cmd = std::string(AUTOPLAN_CLI_PATH) + " config init > /dev/null";
        CHECK(std::system(cmd.c_str()) == 0);
        const std::string bad = std::string(AUTOPLAN_CLI_PATH) + " replay > /dev/null 2>&1";
        CHECK(WEXITSTATUS(std::system(bad.c_str())) == cli::kConfig);
    }
}
