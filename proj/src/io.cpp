#include "synap/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "synap/common.hpp"

namespace synap {

namespace {

std::string numbered(const char* prefix, std::size_t k, int digits, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%0*zu%s", prefix, digits, k, suffix);
    return buf;
}

double parse_double(const std::string& s) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw IoError("not a number: '" + s + "'");
    return v;
}

unsigned long long parse_uint(const std::string& s) {
    unsigned long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw IoError("not an integer: '" + s + "'");
    return v;
}

// Reads known keys and rejects the rest, so typos in configs surface.
class Fields {
public:
    Fields(const Json& j, const char* what) : j_(j), what_(what) {
        if (!j.is_object()) throw DomainError(std::string(what) + " must be an object");
    }
    template <typename T>
    void get(const char* key, T& out) {
        known_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw DomainError(std::string(what_) + "." + key + " has the wrong type");
        }
    }
    template <typename T>
    void nested(const char* key, T& out) {
        known_.insert(key);
        if (j_.contains(key)) from_json(j_.at(key), out);
    }
    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!known_.count(k)) throw DomainError("unknown key '" + k + "' in " + what_);
        }
    }

private:
    const Json& j_;
    const char* what_;
    std::set<std::string> known_;
};

Json number_or_text(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

Json to_json(const MethodReport& m) {
    Json pr = Json::array();
    for (const auto& p : m.pr) pr.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
    return {{"method", m.method},
            {"ratio", number_or_text(m.ratio)},
            {"min_true", m.min_true},
            {"max_false", m.max_false},
            {"true_count", m.true_count},
            {"false_count", m.false_count},
            {"max_gradient", m.max_gradient},
            {"curve", m.curve},
            {"pr", pr}};
}

}  // namespace

void write_pgm16(const fs::path& path, int width, int height, std::span<const std::uint16_t> pixels) {
    if (width <= 0 || height <= 0 ||
        pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DomainError("image size does not match its pixel count");
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << "P5\n" << width << ' ' << height << "\n65535\n";
    std::vector<unsigned char> bytes(pixels.size() * 2);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        bytes[2 * i] = static_cast<unsigned char>(pixels[i] >> 8);
        bytes[2 * i + 1] = static_cast<unsigned char>(pixels[i] & 0xff);
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to " + path.string());
}

Gray16 read_pgm16(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    auto token = [&] {
        std::string t;
        while (f) {
            const int c = f.get();
            if (c == '#') {
                while (f && f.get() != '\n') {
                }
                continue;
            }
            if (c == EOF) break;
            if (std::isspace(c)) {
                if (!t.empty()) break;
                continue;
            }
            t.push_back(static_cast<char>(c));
        }
        return t;
    };
    if (token() != "P5") throw IoError(path.string() + " is not a binary PGM");
    Gray16 img;
    try {
        img.width = std::stoi(token());
        img.height = std::stoi(token());
        if (std::stoi(token()) != 65535) throw IoError(path.string() + " is not a 16-bit PGM");
    } catch (const std::logic_error&) {
        throw IoError(path.string() + " has a malformed header");
    }
    if (img.width <= 0 || img.height <= 0) throw IoError(path.string() + " has a malformed header");
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    std::vector<unsigned char> bytes(2 * n);
    f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(f.gcount()) != bytes.size()) throw IoError(path.string() + " is truncated");
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        img.pixels[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
    }
    return img;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw IoError("CSV row width differs from its header");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("short write to " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Json to_json(const FlightParams& p) {
    return {{"v_f", p.v_f}, {"t_p", p.t_p}, {"t_i", p.t_i}, {"h", p.h}, {"fov", p.fov}, {"d_i", p.d_i}};
}

Json to_json(const OcclusionParams& p) { return {{"d", p.d}, {"o", p.o}, {"l", p.l}, {"alpha", p.alpha}}; }

Json to_json(const IntensityModel& m) {
    return {{"ground", m.ground},       {"ground_noise", m.ground_noise}, {"occluder", m.occluder},
            {"ambient", m.ambient},     {"person", m.person},             {"warm_fraction", m.warm_fraction},
            {"warm_low", m.warm_low},   {"warm_high", m.warm_high},       {"warm_min_height", m.warm_min_height}};
}

Json to_json(const DetectorConfig& c) {
    return {{"threshold", c.threshold}, {"min_area", c.min_area}, {"max_area", c.max_area}, {"baseline", c.baseline}, {"person", c.person}};
}

Json to_json(const FusionConfig& c) {
    return {{"cell_size", c.cell_size}, {"r_match", c.r_match}, {"threshold", c.threshold}};
}

Json to_json(const ScenarioConfig& c) {
    return {{"name", c.name},
            {"flight", to_json(c.flight)},
            {"occlusion", to_json(c.occlusion)},
            {"intensity", to_json(c.intensity)},
            {"dem_spacing", c.dem_spacing},
            {"path_length", c.path_length},
            {"margin", c.margin},
            {"persons", c.persons},
            {"person_radius", c.person_radius},
            {"person_spacing", c.person_spacing},
            {"resolution", c.resolution},
            {"gps_rate", c.gps_rate},
            {"sensor_noise", c.sensor_noise},
            {"detector", to_json(c.detector)},
            {"fusion", to_json(c.fusion)}};
}

Json to_json(const SamplingPlan& p) {
    return {{"d_f", p.d_f}, {"c_f", p.c_f}, {"o_f", p.o_f}, {"n", p.n}, {"t_f", p.t_f},
            {"e_i_max", p.e_i_max}, {"gap_warning", p.gap_warning}, {"stale_warning", p.stale_warning}};
}

Json to_json(const Pose& p) {
    return {{"x", p.position.x}, {"y", p.position.y}, {"z", p.position.z}, {"timestamp", p.timestamp}};
}

Json to_json(const Person& p) {
    return {{"x", p.x}, {"y", p.y}, {"radius", p.radius}, {"intensity", p.intensity}};
}

Json to_json(const EvalReport& r) {
    Json methods = Json::array();
    for (const auto& m : r.methods) methods.push_back(to_json(m));
    return {{"persons", r.persons}, {"clipped", r.clipped}, {"appearances", r.appearances}, {"methods", methods}};
}

void from_json(const Json& j, FlightParams& p) {
    Fields f(j, "flight");
    f.get("v_f", p.v_f);
    f.get("t_p", p.t_p);
    f.get("t_i", p.t_i);
    f.get("h", p.h);
    f.get("fov", p.fov);
    f.get("d_i", p.d_i);
    f.finish();
}

void from_json(const Json& j, OcclusionParams& p) {
    Fields f(j, "occlusion");
    f.get("d", p.d);
    f.get("o", p.o);
    f.get("l", p.l);
    f.get("alpha", p.alpha);
    f.finish();
}

void from_json(const Json& j, IntensityModel& m) {
    Fields f(j, "intensity");
    f.get("ground", m.ground);
    f.get("ground_noise", m.ground_noise);
    f.get("occluder", m.occluder);
    f.get("ambient", m.ambient);
    f.get("person", m.person);
    f.get("warm_fraction", m.warm_fraction);
    f.get("warm_low", m.warm_low);
    f.get("warm_high", m.warm_high);
    f.get("warm_min_height", m.warm_min_height);
    f.finish();
}

void from_json(const Json& j, DetectorConfig& c) {
    Fields f(j, "detector");
    f.get("threshold", c.threshold);
    f.get("min_area", c.min_area);
    f.get("max_area", c.max_area);
    f.get("baseline", c.baseline);
    f.get("person", c.person);
    f.finish();
}

void from_json(const Json& j, FusionConfig& c) {
    Fields f(j, "fusion");
    f.get("cell_size", c.cell_size);
    f.get("r_match", c.r_match);
    f.get("threshold", c.threshold);
    f.finish();
}

void from_json(const Json& j, ScenarioConfig& c) {
    Fields f(j, "config");
    f.get("name", c.name);
    f.nested("flight", c.flight);
    f.nested("occlusion", c.occlusion);
    f.nested("intensity", c.intensity);
    f.get("dem_spacing", c.dem_spacing);
    f.get("path_length", c.path_length);
    f.get("margin", c.margin);
    f.get("persons", c.persons);
    f.get("person_radius", c.person_radius);
    f.get("person_spacing", c.person_spacing);
    f.get("resolution", c.resolution);
    f.get("gps_rate", c.gps_rate);
    f.get("sensor_noise", c.sensor_noise);
    f.nested("detector", c.detector);
    f.nested("fusion", c.fusion);
    f.finish();
}

void from_json(const Json& j, BenchConfig& c) {
    Fields f(j, "bench");
    f.get("n_values", c.n_values);
    f.get("vertex_counts", c.vertex_counts);
    f.get("repetitions", c.repetitions);
    f.get("warmups", c.warmups);
    f.get("resolution", c.resolution);
    f.get("dem_spacing", c.dem_spacing);
    f.get("h", c.h);
    f.get("fov", c.fov);
    f.get("seed", c.seed);
    f.finish();
}

Pose pose_from_json(const Json& j) {
    Pose p;
    Fields f(j, "pose");
    f.get("x", p.position.x);
    f.get("y", p.position.y);
    f.get("z", p.position.z);
    f.get("timestamp", p.timestamp);
    f.finish();
    return p;
}

Person person_from_json(const Json& j) {
    Person p;
    Fields f(j, "person");
    f.get("x", p.x);
    f.get("y", p.y);
    f.get("radius", p.radius);
    f.get("intensity", p.intensity);
    f.finish();
    return p;
}

ScenarioConfig load_config(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw DomainError(path.string() + ": config must be an object");
    ScenarioConfig c;
    if (j.contains("preset")) {
        if (!j["preset"].is_string()) throw DomainError("preset must be a string");
        c = preset(j["preset"].get<std::string>());
        j.erase("preset");
    }
    from_json(j, c);
    return c;
}

CsvTable poses_table(std::span<const Frame> frames) {
    CsvTable t;
    t.header = {"index", "timestamp", "x", "y", "z", "true_x", "true_y", "true_z", "rendered", "out_of_extent"};
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const Frame& f = frames[k];
        t.rows.push_back({std::to_string(k), format_double(f.pose.timestamp), format_double(f.pose.position.x),
                          format_double(f.pose.position.y), format_double(f.pose.position.z),
                          format_double(f.true_position.x), format_double(f.true_position.y),
                          format_double(f.true_position.z), f.rendered ? "1" : "0",
                          std::to_string(f.image.out_of_extent)});
    }
    return t;
}

void save_frames(const fs::path& dir, std::span<const Frame> frames) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (!frames[k].rendered) continue;
        const auto& img = frames[k].image;
        write_pgm16(dir / numbered("frame_", k, 5, ".pgm"), img.width, img.width, img.pixels);
    }
    write_text(dir / "poses.csv", to_csv(poses_table(frames)));
}

std::vector<Frame> load_frames(const fs::path& dir) {
    const CsvTable t = parse_csv(read_text(dir / "poses.csv"));
    if (t.header != poses_table({}).header) throw IoError("poses.csv has an unexpected header");
    std::vector<Frame> frames(t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& r = t.rows[k];
        if (parse_uint(r[0]) != k) throw IoError("poses.csv rows are out of order");
        Frame& f = frames[k];
        f.pose.timestamp = parse_double(r[1]);
        f.pose.position = {parse_double(r[2]), parse_double(r[3]), parse_double(r[4])};
        f.true_position = {parse_double(r[5]), parse_double(r[6]), parse_double(r[7])};
        f.rendered = r[8] == "1";
        if (!f.rendered) continue;
        Gray16 img = read_pgm16(dir / numbered("frame_", k, 5, ".pgm"));
        if (img.width != img.height) throw IoError("frames must be square");
        f.image.width = img.width;
        f.image.pixels = std::move(img.pixels);
        f.image.pose = f.pose;
        f.image.out_of_extent = parse_uint(r[9]);
    }
    return frames;
}

void save_integrals(const fs::path& dir, std::span<const IntegralImage> integrals) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < integrals.size(); ++k) {
        const auto& in = integrals[k];
        std::vector<std::uint16_t> value(in.pixels.size());
        std::vector<std::uint16_t> count(in.pixels.size());
        for (std::size_t i = 0; i < in.pixels.size(); ++i) {
            if (in.count[i] > 65535) throw DomainError("contributing count does not fit 16 bits");
            count[i] = static_cast<std::uint16_t>(in.count[i]);
            value[i] = in.count[i] ? quantize16(in.pixels[i]) : 0;
        }
        write_pgm16(dir / numbered("integral_", k, 4, ".pgm"), in.width, in.width, value);
        write_pgm16(dir / numbered("integral_", k, 4, "_count.pgm"), in.width, in.width, count);
        const Json meta{{"width", in.width}, {"fov", in.fov},         {"center_pose", to_json(in.center_pose)},
                        {"frames", in.frames}, {"excluded", in.excluded}};
        write_text(dir / numbered("integral_", k, 4, ".json"), meta.dump(2) + "\n");
    }
}

std::vector<IntegralImage> load_integrals(const fs::path& dir) {
    std::vector<IntegralImage> out;
    for (std::size_t k = 0;; ++k) {
        const fs::path meta_path = dir / numbered("integral_", k, 4, ".json");
        if (!fs::exists(meta_path)) break;
        IntegralImage in;
        try {
            const Json meta = Json::parse(read_text(meta_path));
            in.width = meta.at("width").get<int>();
            in.fov = meta.at("fov").get<double>();
            in.center_pose = pose_from_json(meta.at("center_pose"));
            in.frames = meta.at("frames").get<std::vector<std::size_t>>();
            in.excluded = meta.at("excluded").get<std::size_t>();
        } catch (const nlohmann::json::exception& e) {
            throw IoError(meta_path.string() + ": " + e.what());
        }
        const Gray16 value = read_pgm16(dir / numbered("integral_", k, 4, ".pgm"));
        const Gray16 count = read_pgm16(dir / numbered("integral_", k, 4, "_count.pgm"));
        if (value.width != in.width || value.height != in.width || count.width != in.width ||
            count.height != in.width) {
            throw IoError("integral " + std::to_string(k) + " images do not match its metadata");
        }
        in.pixels.resize(value.pixels.size());
        in.count.resize(value.pixels.size());
        for (std::size_t i = 0; i < value.pixels.size(); ++i) {
            in.count[i] = count.pixels[i];
            in.pixels[i] = count.pixels[i] ? value.pixels[i] / 65535.0 : std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(in));
    }
    return out;
}

CsvTable bench_table(std::span<const BenchRow> rows) {
    CsvTable t;
    t.header = {"renderer", "n", "vertices", "mean_ms", "std_ms"};
    for (const auto& r : rows) {
        t.rows.push_back({r.renderer, std::to_string(r.n), std::to_string(r.vertices), format_double(r.mean_ms),
                          format_double(r.std_ms)});
    }
    return t;
}

}  // namespace synap
