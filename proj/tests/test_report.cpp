#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lil/report.hpp"

using namespace lil;

namespace {

CrossingReport sample_report(Direction d = Direction::upper) {
    CrossingExperiment e;
    e.boundary.family = Family::rademacher;
    e.horizon_T = 20000;
    e.n_paths = 300;
    e.master_seed = 0xfeedfacecafebeefULL;
    e.direction = d;
    return run_crossing(e);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void expect_same(const CrossingReport& a, const CrossingReport& b) {
    EXPECT_EQ(a.n_paths, b.n_paths);
    EXPECT_EQ(a.n_crossed, b.n_crossed);
    EXPECT_EQ(a.crossing_fraction, b.crossing_fraction);
    EXPECT_EQ(a.wilson_lo, b.wilson_lo);
    EXPECT_EQ(a.wilson_hi, b.wilson_hi);
    EXPECT_EQ(a.truncated, b.truncated);
    EXPECT_EQ(a.first_crossing_histogram, b.first_crossing_histogram);
    EXPECT_EQ(a.fired_linear, b.fired_linear);
    EXPECT_EQ(a.fired_iterated_log, b.fired_iterated_log);
    EXPECT_EQ(a.start_threshold, b.start_threshold);
    EXPECT_EQ(a.lower_stats, b.lower_stats);
    EXPECT_EQ(a.experiment.master_seed, b.experiment.master_seed);
    EXPECT_EQ(a.experiment.boundary.delta, b.experiment.boundary.delta);
    EXPECT_EQ(a.experiment.boundary.k, b.experiment.boundary.k);
    EXPECT_EQ(a.experiment.boundary.family, b.experiment.boundary.family);
    EXPECT_EQ(a.experiment.direction, b.experiment.direction);
}

}  // namespace

TEST(Report, SchemaFields) {
    auto j = to_json(sample_report());
    EXPECT_EQ(j["schema_version"], "1");
    for (const char* key : {"family", "delta", "k", "horizon_T", "n_paths", "master_seed", "direction", "flavor"})
        EXPECT_TRUE(j["experiment"].contains(key)) << key;
    for (const char* key : {"n_crossed", "crossing_fraction", "wilson_ci", "truncated", "first_crossing_histogram"})
        EXPECT_TRUE(j["results"].contains(key)) << key;
    EXPECT_EQ(j["results"]["wilson_ci"].size(), 2u);
}

TEST(Report, JsonRoundTripIsLossless) {
    for (auto d : {Direction::upper, Direction::lower}) {
        const auto r = sample_report(d);
        const auto text = to_json(r).dump();
        const auto back = report_from_json(nlohmann::json::parse(text));
        expect_same(r, back);
        EXPECT_EQ(to_json(back).dump(), text);
    }
}

TEST(Report, CsvHistogramSumsToCrossed) {
    const auto r = sample_report();
    std::istringstream in(to_csv(r));
    std::string line;
    std::getline(in, line);
    std::int64_t total = 0;
    bool summary = false;
    while (std::getline(in, line)) {
        if (line.rfind("bucket,", 0) == 0) {
            const auto a = line.find(',', 7);
            total += std::stoll(line.substr(a + 1, line.find(',', a + 1) - a - 1));
        } else if (line.rfind("summary,", 0) == 0) {
            summary = true;
        }
    }
    EXPECT_TRUE(summary);
    EXPECT_EQ(total, r.n_crossed);
}

TEST(Report, WriteThenRename) {
    const auto dir = std::filesystem::temp_directory_path() / "lil_report_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "r.json";
    const auto r = sample_report();
    write_report(r, path, ReportFormat::json);
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    const auto back = report_from_json(nlohmann::json::parse(slurp(path)));
    expect_same(r, back);
    std::filesystem::remove_all(dir);
}

TEST(Report, UnwritableDestinationNamesThePath) {
    try {
        write_report(sample_report(), "/nonexistent-dir/x/report.json", ReportFormat::json);
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x/report.json"), std::string::npos);
    }
}

TEST(Report, RejectsWrongSchema) {
    auto j = to_json(sample_report());
    j["schema_version"] = "2";
    EXPECT_THROW(report_from_json(nlohmann::json(j)), std::invalid_argument);
}

TEST(Report, ExperimentConfigDefaultsAndOverrides) {
    auto e = experiment_from_json(nlohmann::json::parse(R"({"delta": 0.2, "model": {"kind": "bounded_e2"}})"));
    EXPECT_EQ(e.boundary.delta, 0.2);
    EXPECT_EQ(e.model.kind, ModelKind::bounded_e2);
    EXPECT_EQ(e.model.scale, kE2);
    EXPECT_EQ(e.horizon_T, CrossingExperiment{}.horizon_T);
    EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"direction": "sideways"})")), std::invalid_argument);
}
