// Exercises the shared library through its C header only, and the CLI built on it.
#include "ecgdigi/ecgdigi.h"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

class Scratch {
public:
    Scratch() {
        static std::atomic<int> n{0};
        path_ = fs::temp_directory_path() / ("ecgdigi-capi-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string& s) const { return path_ / s; }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Owned {
    char* p = nullptr;
    ~Owned() { ecgd_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

int run_cli(const std::string& args, const fs::path& out = "/dev/null", const fs::path& err = "/dev/null") {
    const std::string cmd = std::string("'") + ECGDIGI_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Every regular file under `root` by relative path.
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

ecgd_config* small_config(const fs::path& out) {
    ecgd_config* c = nullptr;
    EXPECT_EQ(ecgd_config_create(&c), ECGD_OK);
    const nlohmann::json patch{{"calibration", {{"px_per_mm", 5.0}}},
                               {"output_dir", out.string()},
                               {"reproducible", true},
                               {"seed", 4}};
    EXPECT_EQ(ecgd_config_merge_json(c, patch.dump().c_str()), ECGD_OK);
    return c;
}

}  // namespace

TEST(CApi, VersionAndConfigJson) {
    EXPECT_STRNE(ecgd_version(), "");
    ecgd_config* c = nullptr;
    ASSERT_EQ(ecgd_config_create(&c), ECGD_OK);
    Owned js;
    ASSERT_EQ(ecgd_config_to_json(c, &js.p), ECGD_OK);
    const auto j = nlohmann::json::parse(js.str());
    EXPECT_EQ(j["threshold"]["window"], 25);
    EXPECT_EQ(ecgd_config_merge_json(c, R"({"threshold": {"window": 4}})"), ECGD_INVALID_ARGUMENT);
    Owned kept;
    ASSERT_EQ(ecgd_config_to_json(c, &kept.p), ECGD_OK);
    EXPECT_EQ(nlohmann::json::parse(kept.str())["threshold"]["window"], 25);
    EXPECT_EQ(ecgd_config_merge_json(c, R"({"nope": 1})"), ECGD_INVALID_ARGUMENT);
    EXPECT_NE(std::string(ecgd_last_error()).find("nope"), std::string::npos);
    EXPECT_EQ(ecgd_config_merge_json(c, "{"), ECGD_INVALID_ARGUMENT);
    EXPECT_EQ(ecgd_config_merge_json(nullptr, "{}"), ECGD_INVALID_ARGUMENT);
    ecgd_config_free(c);
}

TEST(CApi, SynthDigitizeAndRecordAccessors) {
    Scratch dir;
    ecgd_config* c = small_config(dir.path());
    ASSERT_EQ(ecgd_synth(c, 1), ECGD_OK) << ecgd_last_error();
    const std::string page = (dir / "pages/page_0000.png").string();
    ASSERT_TRUE(fs::exists(page));

    ecgd_config* d = small_config(dir / "out");
    ecgd_record* rec = nullptr;
    Owned diag;
    ASSERT_EQ(ecgd_digitize(d, page.c_str(), &rec, &diag.p), ECGD_OK) << ecgd_last_error();
    ASSERT_NE(rec, nullptr);
    EXPECT_EQ(nlohmann::json::parse(diag.str())["status"], 0);
    ASSERT_EQ(ecgd_record_lead_count(rec), 12u);
    EXPECT_STREQ(ecgd_record_lead_name(rec, 0), "I");
    EXPECT_STREQ(ecgd_record_lead_name(rec, 11), "V6");
    EXPECT_EQ(ecgd_record_lead_name(rec, 12), nullptr);
    EXPECT_DOUBLE_EQ(ecgd_record_sample_period(rec, 0), 1.0 / 125.0);
    EXPECT_GT(ecgd_record_sample_count(rec, 3), 100u);
    ASSERT_NE(ecgd_record_samples(rec, 3), nullptr);

    Owned js;
    ASSERT_EQ(ecgd_record_to_json(rec, &js.p), ECGD_OK);
    EXPECT_EQ(js.str(), slurp(dir / "out/page_0000.json"));
    ecgd_record* again = nullptr;
    ASSERT_EQ(ecgd_record_from_json(js.p, &again), ECGD_OK);
    Owned js2;
    ASSERT_EQ(ecgd_record_to_json(again, &js2.p), ECGD_OK);
    EXPECT_EQ(js.str(), js2.str());

    Owned svg;
    ASSERT_EQ(ecgd_plot(rec, &svg.p), ECGD_OK);
    EXPECT_EQ(svg.str(), slurp(dir / "out/page_0000.svg"));

    Owned lines, djs;
    ASSERT_EQ(ecgd_detect(c, page.c_str(), &lines.p, &djs.p), ECGD_OK);
    const std::string text = lines.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 12);

    ecgd_record_free(again);
    ecgd_record_free(rec);
    ecgd_config_free(d);
    ecgd_config_free(c);
}

TEST(CApi, ErrorStatuses) {
    Scratch dir;
    ecgd_config* c = small_config(dir.path());
    ecgd_record* rec = nullptr;
    EXPECT_EQ(ecgd_digitize(c, (dir / "missing.png").c_str(), &rec, nullptr), ECGD_IO);
    EXPECT_NE(std::string(ecgd_last_error()).find("missing.png"), std::string::npos);
    EXPECT_EQ(rec, nullptr);
    EXPECT_EQ(ecgd_record_from_json("{}", &rec), ECGD_FORMAT);
    EXPECT_NE(std::string(ecgd_last_error()).find("/version"), std::string::npos);
    EXPECT_EQ(ecgd_record_load((dir / "none.json").c_str(), &rec), ECGD_IO);
    EXPECT_EQ(ecgd_synth(c, -1), ECGD_INVALID_ARGUMENT);
    EXPECT_EQ(ecgd_record_lead_count(nullptr), 0u);
    EXPECT_EQ(ecgd_eval_binarize((dir / "a").c_str(), (dir / "b").c_str(), nullptr, nullptr), ECGD_IO);
    ecgd_config_free(c);
}

TEST(Cli, ExitCodes) {
    Scratch dir;
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("digitize"), ECGD_INVALID_ARGUMENT);
    EXPECT_EQ(run_cli("digitize '" + (dir / "missing.png").string() + "'", "/dev/null", dir / "err.txt"), ECGD_IO);
    const auto err = nlohmann::json::parse(slurp(dir / "err.txt"));
    EXPECT_EQ(err["error"]["code"], ECGD_IO);
    EXPECT_EQ(err["error"]["command"], "digitize");

    std::ofstream(dir / "bad.json") << R"({"threshold": {"windw": 3}})";
    EXPECT_EQ(run_cli("synth --count 0 -o '" + (dir / "s").string() + "' --config '" + (dir / "bad.json").string() + "'"),
              ECGD_INVALID_ARGUMENT);

    // Blank page: no leads.
    ASSERT_EQ(run_cli("synth --count 1 --px-per-mm 4 --reproducible -o '" + (dir / "s").string() + "'"), 0);
    ASSERT_EQ(run_cli("synth --count 1 --px-per-mm 4 --contrast 0.001 --brightness 200 -o '" + (dir / "w").string() + "'"),
              0);
    EXPECT_EQ(run_cli("digitize --px-per-mm 4 -o '" + (dir / "wo").string() + "' '" +
                      (dir / "w/pages/page_0000.png").string() + "'"),
              ECGD_NO_LEADS);
    EXPECT_EQ(run_cli("plot '" + (dir / "s/manifest.json").string() + "'"), ECGD_FORMAT);
}

TEST(Cli, ReproducibleRunsAreByteIdentical) {
    Scratch dir;
    for (const char* run : {"a", "b"}) {
        const fs::path r = dir / run;
        const std::string common = " --seed 21 --reproducible --px-per-mm 5";
        ASSERT_EQ(run_cli("synth --count 2 -o '" + (r / "syn").string() + "'" + common), 0);
        const std::string page = (r / "syn/pages/page_0001.png").string();
        ASSERT_EQ(run_cli("digitize --save-intermediates -o '" + (r / "dig").string() + "' '" + page + "'" + common,
                          r / "digitize.out"),
                  0);
        ASSERT_EQ(run_cli("detect -o '" + (r / "det/page_0001.txt").string() + "' --json '" +
                              (r / "det.json").string() + "' '" + page + "'" + common + " --threads 1"),
                  ECGD_IO);  // det/ does not exist yet
        fs::create_directories(r / "det");
        ASSERT_EQ(run_cli("detect -o '" + (r / "det/page_0001.txt").string() + "' --json '" +
                          (r / "det.json").string() + "' '" + page + "'" + common),
                  0);
        fs::create_directories(r / "truth");
        fs::copy(r / "syn/labels/page_0001.txt", r / "truth/page_0001.txt");
        ASSERT_EQ(run_cli("eval-detect '" + (r / "det").string() + "' '" + (r / "truth").string() + "' --pages '" +
                              (r / "syn/pages").string() + "' --report '" + (r / "ed.json").string() + "'",
                          r / "ed.txt"),
                  0);
        fs::create_directories(r / "gt_masks");
        for (const auto& e : fs::directory_iterator(r / "dig/masks"))
            fs::copy(r / "syn/masks" / e.path().filename(), r / "gt_masks" / e.path().filename());
        ASSERT_EQ(run_cli("eval-binarize '" + (r / "dig/masks").string() + "' '" + (r / "gt_masks").string() +
                              "' --report '" + (r / "eb.json").string() + "'",
                          r / "eb.txt"),
                  0);
        ASSERT_EQ(run_cli("plot -o '" + (r / "plot.svg").string() + "' '" + (r / "dig/page_0001.json").string() + "'"),
                  0);
    }
    const auto a = tree(dir / "a"), b = tree(dir / "b");
    ASSERT_EQ(a.size(), b.size());
    for (const auto& [rel, body] : a) {
        ASSERT_TRUE(b.contains(rel)) << rel;
        EXPECT_EQ(body, b.at(rel)) << rel;
    }
    EXPECT_NE(slurp(dir / "a/ed.txt").find("mAP @ 50%"), std::string::npos);
}
