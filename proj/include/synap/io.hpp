#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "synap/bench.hpp"
#include "synap/fusion.hpp"
#include "synap/integral.hpp"
#include "synap/metrics.hpp"
#include "synap/pipeline.hpp"

namespace synap {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Raised for unreadable or malformed files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct Gray16 {
    int width = 0, height = 0;
    std::vector<std::uint16_t> pixels;
};

/// Binary PGM (P5) with maxval 65535, big-endian samples.
void write_pgm16(const fs::path& path, int width, int height, std::span<const std::uint16_t> pixels);
Gray16 read_pgm16(const fs::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

Json to_json(const FlightParams& p);
Json to_json(const OcclusionParams& p);
Json to_json(const IntensityModel& m);
Json to_json(const DetectorConfig& c);
Json to_json(const FusionConfig& c);
Json to_json(const ScenarioConfig& c);
Json to_json(const SamplingPlan& p);
Json to_json(const Pose& p);
Json to_json(const Person& p);
Json to_json(const EvalReport& r);

/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const Json& j, FlightParams& p);
void from_json(const Json& j, OcclusionParams& p);
void from_json(const Json& j, IntensityModel& m);
void from_json(const Json& j, DetectorConfig& c);
void from_json(const Json& j, FusionConfig& c);
void from_json(const Json& j, ScenarioConfig& c);
void from_json(const Json& j, BenchConfig& c);
Pose pose_from_json(const Json& j);
Person person_from_json(const Json& j);

/// Config document: a preset name under "preset" plus overrides.
ScenarioConfig load_config(const fs::path& path);

CsvTable poses_table(std::span<const Frame> frames);
/// Writes frame_NNNNN.pgm for rendered frames and poses.csv for all.
void save_frames(const fs::path& dir, std::span<const Frame> frames);
std::vector<Frame> load_frames(const fs::path& dir);

/// integral_NNNN.pgm (intensity), integral_NNNN_count.pgm and
/// integral_NNNN.json (centre pose, frames, excluded count). Pixels must
/// already lie on the 16-bit grid for an exact round trip.
void save_integrals(const fs::path& dir, std::span<const IntegralImage> integrals);
std::vector<IntegralImage> load_integrals(const fs::path& dir);

CsvTable bench_table(std::span<const BenchRow> rows);

}  // namespace synap
