// Drives the gazeid executable end to end on a small synthetic dataset.

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "gazeid_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const auto log = work() / "stdout.txt";
    const std::string cmd = std::string("\"") + GAZEID_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Five subjects, two sessions, 40 s each; shared by the tests below.
const fs::path& dataset() {
    static const fs::path dir = [] {
        const auto d = work() / "data";
        const auto r = run("synth --out " + q(d) + " --subjects 5 --duration 40 --seed 11");
        EXPECT_EQ(r.code, 0) << r.out;
        return d;
    }();
    return dir;
}

const fs::path& model() {
    static const fs::path path = [] {
        const auto m = work() / "model.json";
        const auto r = run("train --data " + q(dataset()) + " --clusters 8 --out " + q(m));
        EXPECT_EQ(r.code, 0) << r.out;
        EXPECT_NE(r.out.find("enrolled 5 subjects: 40 fixation neurons, 40 saccade neurons"), std::string::npos) << r.out;
        return m;
    }();
    return path;
}

} // namespace

TEST(Cli, HelpListsDefaults) {
    auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"synth", "ingest-check", "segment", "features", "select-features", "train", "identify", "evaluate"}) {
        EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    }
    r = run("train --help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--velocity-threshold"), std::string::npos);
    EXPECT_NE(r.out.find("50"), std::string::npos);
    EXPECT_NE(r.out.find("--clusters"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("synth --out " + q(work() / "zero") + " --subjects 0").code, 2);
    EXPECT_EQ(run("synth --out " + q(work() / "rate") + " --rate 500").code, 2);
    EXPECT_EQ(run("train --data " + q(dataset()) + " --lambda 2").code, 2);
}

TEST(Cli, SynthWritesDatasetDeterministically) {
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dataset())) files += e.path().extension() == ".csv" ? 1 : 0;
    EXPECT_EQ(files, 11u);
    EXPECT_TRUE(fs::exists(dataset() / "truth.csv"));
    const auto again = work() / "data_again";
    ASSERT_EQ(run("synth --out " + q(again) + " --subjects 5 --duration 40 --seed 11").code, 0);
    for (const auto& e : fs::directory_iterator(dataset())) {
        EXPECT_EQ(slurp(e.path()), slurp(again / e.path().filename())) << e.path();
    }
}

TEST(Cli, IngestCheck) {
    auto r = run("ingest-check " + q(dataset() / "S001_1.csv") + " " + q(dataset() / "S002_2.csv"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("subject S002 session 2"), std::string::npos) << r.out;
    const auto bad = work() / "bad.csv";
    std::ofstream(bad) << "t_ms,valid,theta_x_deg,theta_y_deg,stim_x_deg,stim_y_deg\n0,1,0,0,0,0\n4,1,0,0,0,0\n2,1,0,0,0,0\n";
    r = run("ingest-check " + q(bad));
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(run("ingest-check " + q(work() / "missing.csv")).code, 1);
}

TEST(Cli, SegmentAndFeatures) {
    const auto segs = work() / "segs.csv";
    ASSERT_EQ(run("segment " + q(dataset() / "S001_1.csv") + " --out " + q(segs)).code, 0);
    const auto text = slurp(segs);
    EXPECT_EQ(text.substr(0, text.find('\n')), "start_idx,end_idx,kind,duration_ms");
    EXPECT_NE(text.find("SACCADE"), std::string::npos);

    const auto dir = work() / "features";
    ASSERT_EQ(run("features --data " + q(dataset()) + " --session 1 --out " + q(dir)).code, 0);
    EXPECT_TRUE(fs::exists(dir / "fixations.csv"));
    EXPECT_TRUE(fs::exists(dir / "saccades.csv"));
}

TEST(Cli, TrainIsDeterministic) {
    const auto again = work() / "model_again.json";
    ASSERT_EQ(run("train --data " + q(dataset()) + " --clusters 8 --out " + q(again)).code, 0);
    EXPECT_EQ(slurp(model()), slurp(again));
}

TEST(Cli, ConfigFileAndFlagOverride) {
    const auto ini = work() / "cfg.ini";
    std::ofstream(ini) << "[model]\nclusters = 4\nseed = 3\n";
    const auto a = work() / "model_cfg.json";
    auto r = run("train --config " + q(ini) + " --data " + q(dataset()) + " --out " + q(a));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("20 fixation neurons"), std::string::npos) << r.out;
    r = run("train --config " + q(ini) + " --clusters 6 --data " + q(dataset()) + " --out " + q(a));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("30 fixation neurons"), std::string::npos) << r.out;
    std::ofstream(ini) << "[model]\nclusterz = 4\n";
    EXPECT_EQ(run("train --config " + q(ini) + " --data " + q(dataset()) + " --out " + q(a)).code, 2);
}

TEST(Cli, TooLittleEnrollmentDataExitsThree) {
    const auto tiny = work() / "tiny";
    ASSERT_EQ(run("synth --out " + q(tiny) + " --subjects 2 --duration 3").code, 0);
    const auto r = run("train --data " + q(tiny) + " --out " + q(work() / "tiny.json"));
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_FALSE(fs::exists(work() / "tiny.json"));
}

TEST(Cli, IdentifyAndEvaluate) {
    auto r = run("identify --model " + q(model()) + " " + q(dataset() / "S003_2.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find(",S003,"), std::string::npos) << r.out;

    const auto out = work() / "report";
    r = run("evaluate --model " + q(model()) + " --data " + q(dataset()) + " --out " + q(out) + " --one-to-one");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_GE(rep["r1"].get<double>(), 0.8);
    EXPECT_GE(rep["r1_one_to_one"].get<double>(), rep["r1"].get<double>());
    EXPECT_EQ(slurp(out / "det.csv").substr(0, 8), "far,frr\n");
    EXPECT_EQ(slurp(out / "cmc.csv").substr(0, 14), "rank,accuracy\n");
}

TEST(Cli, MissingModelExitsOne) {
    EXPECT_EQ(run("evaluate --model " + q(work() / "nope.json") + " --data " + q(dataset())).code, 1);
    EXPECT_EQ(run("identify --model " + q(work() / "nope.json") + " " + q(dataset() / "S001_1.csv")).code, 1);
}

TEST(Cli, IdentityMismatchExitsFour) {
    const auto more = work() / "six";
    ASSERT_EQ(run("synth --out " + q(more) + " --subjects 6 --duration 40 --seed 11").code, 0);
    EXPECT_EQ(run("evaluate --model " + q(model()) + " --data " + q(more) + " --out " + q(work() / "r6")).code, 4);
    const auto fewer = work() / "four";
    ASSERT_EQ(run("synth --out " + q(fewer) + " --subjects 4 --duration 40 --seed 11").code, 0);
    EXPECT_EQ(run("evaluate --model " + q(model()) + " --data " + q(fewer) + " --out " + q(work() / "r4")).code, 4);
}

TEST(Cli, SelectFeaturesWritesUsableMask) {
    const auto mask = work() / "mask.json";
    auto r = run("select-features --data " + q(dataset()) + " --clusters 4 --rounds 2 --out " + q(mask));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(slurp(mask));
    EXPECT_TRUE(j.contains("fixation"));
    EXPECT_TRUE(j.contains("saccade"));
    r = run("train --data " + q(dataset()) + " --clusters 4 --mask " + q(mask) + " --out " + q(work() / "masked.json"));
    EXPECT_EQ(r.code, 0) << r.out;
}
