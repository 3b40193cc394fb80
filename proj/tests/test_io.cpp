#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <unistd.h>

#include "synap/common.hpp"
#include "synap/io.hpp"

using namespace synap;

namespace {

// Fresh scratch directory per test, removed afterwards.
class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("synap_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

bool same_double(double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || std::memcmp(&a, &b, sizeof a) == 0;
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 10000; ++i) {
        std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) continue;
        EXPECT_TRUE(same_double(std::stod(format_double(v)), v)) << format_double(v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, CsvRoundTrip) {
    CsvTable t{{"a", "b", "c"}, {{"1", "", "x"}, {"2", "3.5", ""}}};
    const CsvTable back = parse_csv(to_csv(t));
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), IoError);
    EXPECT_TRUE(parse_csv("a,b\n").rows.empty());
}

TEST_F(TempDir, Pgm16RoundTripAndRejectsJunk) {
    std::vector<std::uint16_t> px{0, 1, 255, 256, 65535, 4660};
    write_pgm16(dir_ / "a.pgm", 3, 2, px);
    const Gray16 img = read_pgm16(dir_ / "a.pgm");
    EXPECT_EQ(img.width, 3);
    EXPECT_EQ(img.height, 2);
    EXPECT_EQ(img.pixels, px);
    // Big-endian samples after the header.
    const std::string raw = read_text(dir_ / "a.pgm");
    EXPECT_EQ(raw.substr(0, 2), "P5");
    EXPECT_EQ(static_cast<unsigned char>(raw[raw.size() - 2]), 0x12);
    EXPECT_EQ(static_cast<unsigned char>(raw[raw.size() - 1]), 0x34);

    write_text(dir_ / "b.pgm", "P2\n1 1\n65535\n0\n");
    EXPECT_THROW(read_pgm16(dir_ / "b.pgm"), IoError);
    write_text(dir_ / "c.pgm", "P5\n4 4\n65535\n\x01\x02");
    EXPECT_THROW(read_pgm16(dir_ / "c.pgm"), IoError);
    write_text(dir_ / "d.pgm", "P5\n2 2\n255\n1234");
    EXPECT_THROW(read_pgm16(dir_ / "d.pgm"), IoError);
    EXPECT_THROW(read_pgm16(dir_ / "missing.pgm"), IoError);
}

TEST(Io, ConfigJsonRoundTrip) {
    ScenarioConfig c = dense_forest_preset();
    c.flight.v_f = 6.5;
    c.persons = 7;
    c.detector.max_area = 55;
    c.fusion.r_match = 1.25;
    ScenarioConfig back;
    from_json(to_json(c), back);
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
    EXPECT_EQ(back.name, "dense_forest");
    EXPECT_EQ(back.flight.v_f, 6.5);
    EXPECT_EQ(back.detector.max_area, 55);
}

TEST(Io, UnknownOrMistypedKeysAreRejected) {
    ScenarioConfig c;
    EXPECT_THROW(from_json(Json{{"flight", {{"speed", 3}}}}, c), DomainError);
    EXPECT_THROW(from_json(Json{{"persons", "three"}}, c), DomainError);
    EXPECT_THROW(from_json(Json{{"bogus", 1}}, c), DomainError);
    from_json(Json{{"flight", {{"v_f", 10}}}}, c);
    EXPECT_EQ(c.flight.v_f, 10.0);
    EXPECT_EQ(c.flight.h, 35.0);
}

TEST_F(TempDir, LoadConfigAppliesPresetThenOverrides) {
    write_text(dir_ / "c.json", R"({"preset": "dense_forest", "flight": {"v_f": 10}, "persons": 2})");
    const ScenarioConfig c = load_config(dir_ / "c.json");
    EXPECT_EQ(c.name, "dense_forest");
    EXPECT_EQ(c.occlusion.d, dense_forest_preset().occlusion.d);
    EXPECT_EQ(c.flight.v_f, 10.0);
    EXPECT_EQ(c.persons, 2);
    write_text(dir_ / "bad.json", R"({"preset": "jungle"})");
    EXPECT_THROW(load_config(dir_ / "bad.json"), DomainError);
    write_text(dir_ / "broken.json", "{");
    EXPECT_THROW(load_config(dir_ / "broken.json"), DomainError);
}

TEST_F(TempDir, FramesRoundTripExactly) {
    ScenarioConfig c;
    c.path_length = 60;
    c.persons = 1;
    c.resolution = 24;
    const Scene scene = build_scene(c, 3);
    const auto frames = simulate_frames(scene, c, 3);
    save_frames(dir_, frames);
    const auto back = load_frames(dir_);
    ASSERT_EQ(back.size(), frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
        EXPECT_EQ(back[k].rendered, frames[k].rendered);
        EXPECT_EQ(back[k].pose, frames[k].pose);
        EXPECT_EQ(back[k].true_position, frames[k].true_position);
        EXPECT_EQ(back[k].image.pixels, frames[k].image.pixels);
        if (frames[k].rendered) {
            EXPECT_EQ(back[k].image.pose, frames[k].image.pose);
            EXPECT_EQ(back[k].image.out_of_extent, frames[k].image.out_of_extent);
        }
    }
}

TEST_F(TempDir, IntegralsRoundTripExactly) {
    ScenarioConfig c;
    c.path_length = 60;
    c.persons = 1;
    c.resolution = 24;
    const Scene scene = build_scene(c, 4);
    const auto frames = simulate_frames(scene, c, 4);
    const auto integrals = compute_integrals(frames, scene.dem, c);
    ASSERT_FALSE(integrals.empty());
    save_integrals(dir_, integrals);
    const auto back = load_integrals(dir_);
    ASSERT_EQ(back.size(), integrals.size());
    for (std::size_t k = 0; k < integrals.size(); ++k) {
        EXPECT_EQ(back[k].width, integrals[k].width);
        EXPECT_EQ(back[k].fov, integrals[k].fov);
        EXPECT_EQ(back[k].center_pose, integrals[k].center_pose);
        EXPECT_EQ(back[k].frames, integrals[k].frames);
        EXPECT_EQ(back[k].excluded, integrals[k].excluded);
        EXPECT_EQ(back[k].count, integrals[k].count);
        for (std::size_t i = 0; i < back[k].pixels.size(); ++i) {
            EXPECT_TRUE(same_double(back[k].pixels[i], integrals[k].pixels[i]));
        }
    }
}
