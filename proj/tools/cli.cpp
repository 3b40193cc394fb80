#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <CLI11.hpp>

#include "synap/bench.hpp"
#include "synap/common.hpp"
#include "synap/io.hpp"
#include "synap/occlusion.hpp"
#include "synap/pipeline.hpp"
#include "synap/sampling.hpp"

namespace synap::cli {

namespace {

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool check = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON config document")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "seed for every stochastic step");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_flag("--check", c.check, "verify the command's acceptance properties (exit 3 on failure)");
}

std::uint64_t require_seed(const Common& c) {
    if (!c.seed) throw CLI::RequiredError("--seed");
    return *c.seed;
}

bool within(double value, double expected, double rel) { return std::abs(value - expected) <= rel * std::abs(expected); }

// ---- plan -------------------------------------------------------------

struct PlanArgs {
    Common common;
    std::vector<double> v_f{1, 4, 6, 10};
    FlightParams flight;
    double d_i1 = 1.0;
    double h2 = 1000.0;
};

// Worked values at h = 35 m, FOV 43 deg, t_p 0.5 s, t_i 1/30 s.
struct PlanExpectation {
    double v_f, d_f, o_f, t_f, e_cm;
};
constexpr PlanExpectation kPlanExpected[] = {
    {1, 0.5, 55.2, 27.6, 1.67},
    {4, 2.0, 13.8, 6.9, 6.67},
    {6, 3.0, 9.2, 4.6, 10.0},
    {10, 5.0, 5.52, 2.76, 16.67},
};

int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err) {
    FlightParams base = a.flight;
    CsvTable t;
    t.header = {"v_f", "d_f", "c_f", "o_f", "n", "t_f", "e_i_max_cm", "d_i2", "gap_warning", "stale_warning"};
    const double d_i2 = altitude_scaled_spacing(a.d_i1, base.h, a.h2);
    Json plans = Json::array();
    std::vector<std::string> failures;
    for (const double v : a.v_f) {
        FlightParams p = base;
        p.v_f = v;
        const SamplingPlan plan = make_plan(p);
        if (plan.gap_warning) {
            err << "warning: v_f=" << v << ": o_f " << plan.o_f << " < 1, o_f should not fall below 1\n";
        }
        if (plan.stale_warning) {
            err << "warning: v_f=" << v << ": d_f < d_i, subsequent integrals will not change\n";
        }
        t.rows.push_back({format_double(v), format_double(plan.d_f), format_double(plan.c_f), format_double(plan.o_f),
                          std::to_string(plan.n), format_double(plan.t_f), format_double(100.0 * plan.e_i_max),
                          format_double(d_i2), plan.gap_warning ? "1" : "0", plan.stale_warning ? "1" : "0"});
        Json j = to_json(plan);
        j["v_f"] = v;
        plans.push_back(j);
        for (const auto& e : kPlanExpected) {
            if (e.v_f != v) continue;
            const bool row_ok = within(plan.d_f, e.d_f, 0.01) && within(plan.c_f, 27.6, 0.01) &&
                                within(plan.o_f, e.o_f, 0.01) && within(plan.t_f, e.t_f, 0.01) &&
                                within(100.0 * plan.e_i_max, e.e_cm, 0.01) && plan.n == 30;
            if (!row_ok) failures.push_back("v_f=" + format_double(v));
        }
    }
    if (!within(d_i2, 28.6, 0.01)) failures.push_back("d_i2");

    const std::string csv = to_csv(t);
    out << csv;
    if (!a.common.out.empty()) {
        fs::create_directories(a.common.out);
        write_text(fs::path(a.common.out) / "plan.csv", csv);
        const Json doc{{"flight", to_json(base)}, {"d_i1", a.d_i1}, {"h2", a.h2}, {"d_i2", d_i2}, {"plans", plans}};
        write_text(fs::path(a.common.out) / "plan.json", doc.dump(2) + "\n");
    }
    if (a.common.check && !failures.empty()) {
        std::string msg = "plan differs from the worked values:";
        for (const auto& f : failures) msg += " " + f;
        throw CheckFailed(msg);
    }
    return ok;
}

// ---- occlusion --------------------------------------------------------

struct OcclusionArgs {
    Common common;
    OcclusionParams params{0.01, 1.0, 100.0, 0.0};
    std::vector<double> alpha{0, 10, 20, 30, 40, 50, 60, 70, 80};
    std::uint64_t rays = 1'000'000;
};

int cmd_occlusion(const OcclusionArgs& a, std::ostream& out, std::ostream&) {
    const std::uint64_t seed = require_seed(a.common);
    CsvTable t;
    t.header = {"alpha", "formula", "oracle", "abs_error", "standard_error"};
    double worst = 0;
    for (const double alpha : a.alpha) {
        OcclusionParams p = a.params;
        p.alpha = alpha;
        const double formula = oblique_density_direct(p).value;
        const OracleResult mc = mc_occlusion_oracle(seed, p, a.rays);
        const double e = std::abs(formula - mc.fraction);
        worst = std::max(worst, e);
        t.rows.push_back({format_double(alpha), format_double(formula), format_double(mc.fraction), format_double(e),
                          format_double(mc.standard_error)});
    }
    const std::string csv = to_csv(t);
    out << csv;
    if (!a.common.out.empty()) {
        fs::create_directories(a.common.out);
        write_text(fs::path(a.common.out) / "occlusion.csv", csv);
    }
    if (a.common.check && worst > 0.01) {
        throw CheckFailed("formula and oracle differ by " + format_double(worst) + " > 0.01");
    }
    return ok;
}

// ---- scenario stages --------------------------------------------------

struct ScenarioArgs {
    Common common;
    std::string preset;
    std::optional<double> v_f;
    std::optional<int> resolution;
    std::optional<int> persons;
    std::string in;
};

ScenarioConfig scenario_config(const ScenarioArgs& a) {
    if (!a.common.config.empty() && !a.preset.empty()) {
        throw CLI::ValidationError("--preset", "use either --preset or --config, not both");
    }
    ScenarioConfig c = a.common.config.empty() ? open_field_preset() : load_config(a.common.config);
    if (!a.preset.empty()) c = preset(a.preset);
    if (a.v_f) c.flight.v_f = *a.v_f;
    if (a.resolution) c.resolution = *a.resolution;
    if (a.persons) c.persons = *a.persons;
    c.validate();
    return c;
}

fs::path require_out(const Common& c) {
    if (c.out.empty()) throw CLI::RequiredError("--out");
    return c.out;
}

Json scene_record(const Scene& scene, const ScenarioConfig& config, std::uint64_t seed) {
    Json persons = Json::array();
    for (const auto& p : scene.persons) persons.push_back(to_json(p));
    const Dem& d = scene.dem;
    return {{"seed", seed},
            {"plan", to_json(make_plan(config.flight))},
            {"dem", {{"x0", d.x0()}, {"y0", d.y0()}, {"spacing", d.spacing()}, {"nx", d.nx()}, {"ny", d.ny()}}},
            {"occluders", scene.occluders.occluders().size()},
            {"persons", persons}};
}

struct StageInput {
    ScenarioConfig config;
    std::uint64_t seed;
    std::vector<Person> persons;
    Json record;
};

StageInput read_stage(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    StageInput s{load_config(dir / "config.json"), 0, {}, {}};
    try {
        s.record = Json::parse(read_text(dir / "scene.json"));
        s.seed = s.record.at("seed").get<std::uint64_t>();
        for (const auto& p : s.record.at("persons")) s.persons.push_back(person_from_json(p));
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "scene.json").string() + ": " + e.what());
    }
    return s;
}

void write_stage(const fs::path& dir, const ScenarioConfig& config, const Json& record) {
    fs::create_directories(dir);
    write_text(dir / "config.json", to_json(config).dump(2) + "\n");
    write_text(dir / "scene.json", record.dump(2) + "\n");
}

bool near_any(double x, double y, std::span<const Person> persons, double r) {
    for (const auto& p : persons) {
        if (std::hypot(x - p.x, y - p.y) <= r) return true;
    }
    return false;
}

void write_fusion(const fs::path& dir, const ScenarioConfig& config, std::span<const IntegralImage> integrals,
                  const Dem& dem, std::span<const Person> persons, const FusionResult& r) {
    fs::create_directories(dir);
    const double r_match = config.fusion.r_match;

    CsvTable det;
    det.header = {"integral", "c0", "r0", "c1", "r1", "area", "score", "ground_x", "ground_y", "truth"};
    const auto labelled = single_detections(integrals, r.detections, dem, persons, r_match);
    std::size_t next = 0;
    for (std::size_t k = 0; k < integrals.size(); ++k) {
        for (const auto& d : r.detections[k]) {
            const auto& l = labelled[next++];
            det.rows.push_back({std::to_string(k), std::to_string(d.box.c0), std::to_string(d.box.r0),
                                std::to_string(d.box.c1), std::to_string(d.box.r1), std::to_string(d.area),
                                format_double(d.score), format_double(l.x), format_double(l.y), l.truth ? "1" : "0"});
        }
    }
    write_text(dir / "detections.csv", to_csv(det));

    CsvTable dec;
    dec.header = {"integral", "cell_x", "cell_y", "method", "score", "decision", "partial", "truth"};
    for (const auto& [index, d] : r.decisions) {
        const bool truth = near_any(d.x, d.y, persons, r_match);
        for (const Method m : kMethods) {
            const auto i = static_cast<std::size_t>(m);
            if (d.value[i] == 0.0 && !d.positive[i]) continue;
            dec.rows.push_back({std::to_string(index), format_double(d.x), format_double(d.y), method_name(m),
                                format_double(d.value[i]), d.positive[i] ? "1" : "0", d.partial ? "1" : "0",
                                truth ? "1" : "0"});
        }
    }
    write_text(dir / "decisions.csv", to_csv(dec));

    CsvTable curves;
    curves.header = {"method", "rank", "score"};
    for (const auto& m : r.report.methods) {
        for (std::size_t i = 0; i < m.curve.size(); ++i) {
            curves.rows.push_back({m.method, std::to_string(i), format_double(m.curve[i])});
        }
    }
    write_text(dir / "curves.csv", to_csv(curves));

    for (const Method m : kMethods) {
        const auto values = r.map.values(m);
        std::vector<std::uint16_t> px(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) px[i] = quantize16(values[i]);
        write_pgm16(dir / (std::string("confidence_") + method_name(m) + ".pgm"), r.map.cols(), r.map.rows(), px);
    }
    write_text(dir / "report.json", to_json(r.report).dump(2) + "\n");
}

void print_report(const EvalReport& r, std::ostream& out) {
    CsvTable t;
    t.header = {"method", "ratio", "min_true", "max_false", "true_count", "false_count", "max_gradient"};
    for (const auto& m : r.methods) {
        t.rows.push_back({m.method, format_double(m.ratio), format_double(m.min_true), format_double(m.max_false),
                          std::to_string(m.true_count), std::to_string(m.false_count), format_double(m.max_gradient)});
    }
    out << to_csv(t);
    out << "appearances";
    for (const int a : r.appearances) out << ' ' << a;
    out << '\n';
}

void check_fusion(const EvalReport& r) {
    const double mm = r.of(Method::max_median).ratio;
    if (!(mm > 1.0)) throw CheckFailed("max_median separation ratio " + format_double(mm) + " is not above 1");
}

int cmd_simulate(const ScenarioArgs& a, std::ostream& out, std::ostream& err) {
    const std::uint64_t seed = require_seed(a.common);
    const fs::path dir = require_out(a.common);
    const ScenarioConfig config = scenario_config(a);
    const Scene scene = build_scene(config, seed);
    const auto frames = simulate_frames(scene, config, seed);
    write_stage(dir, config, scene_record(scene, config, seed));
    save_frames(dir / "frames", frames);

    std::size_t rendered = 0, outside = 0;
    for (const auto& f : frames) {
        rendered += f.rendered;
        outside += f.image.out_of_extent;
    }
    if (outside) err << "warning: " << outside << " pixels saw no scene (ambient)\n";
    out << "frames," << frames.size() << "\nrendered," << rendered << "\npersons," << scene.persons.size() << '\n';
    if (a.common.check) {
        const std::size_t expected = scan_frame_count(config.flight, scenario_path(config));
        if (frames.size() != expected) throw CheckFailed("frame count differs from path / (v_f t_i)");
    }
    return ok;
}

struct IntegrateArgs {
    ScenarioArgs scenario;
    bool classical = false;
    bool bench = false;
    BenchConfig bench_config;
};

int cmd_integrate(const IntegrateArgs& a, std::ostream& out, std::ostream& err) {
    const Common& c = a.scenario.common;
    if (a.scenario.in.empty() && !a.bench) throw CLI::RequiredError("--in");
    bool failed = false;
    std::string why;
    if (!a.scenario.in.empty()) {
        const fs::path dir = require_out(c);
        const StageInput in = read_stage(a.scenario.in);
        const Scene scene = build_scene(in.config, in.seed);
        const auto frames = load_frames(fs::path(a.scenario.in) / "frames");
        const auto plan = make_plan(in.config.flight);
        auto integrals = sliding_integrals(frames, scene.dem, in.config.flight, plan, !a.classical);
        if (c.check) {
            auto other = sliding_integrals(frames, scene.dem, in.config.flight, plan, a.classical);
            CsvTable eq;
            eq.header = {"integral", "max_abs_diff", "valid_mismatch", "pass"};
            for (std::size_t k = 0; k < integrals.size(); ++k) {
                double worst = 0;
                std::size_t mismatch = 0;
                for (std::size_t i = 0; i < integrals[k].pixels.size(); ++i) {
                    if (integrals[k].count[i] != other[k].count[i]) ++mismatch;
                    if (integrals[k].count[i] && other[k].count[i]) {
                        worst = std::max(worst, std::abs(integrals[k].pixels[i] - other[k].pixels[i]));
                    }
                }
                const bool pass = worst <= 1e-6 && mismatch == 0;
                if (!pass) {
                    failed = true;
                    why = "classical and deferred integrals differ";
                }
                eq.rows.push_back({std::to_string(k), format_double(worst), std::to_string(mismatch), pass ? "1" : "0"});
            }
            fs::create_directories(dir);
            write_text(dir / "equivalence.csv", to_csv(eq));
        }
        for (auto& integral : integrals) quantize_integral(integral);
        std::size_t excluded = 0;
        for (const auto& integral : integrals) excluded += integral.excluded;
        if (excluded) err << "warning: " << excluded << " frames missed the DEM and were excluded\n";
        write_stage(dir, in.config, in.record);
        save_integrals(dir / "integrals", integrals);
        out << "integrals," << integrals.size() << '\n';
    }
    if (a.bench) {
        const auto rows = bench_rendering(a.bench_config);
        const std::string csv = to_csv(bench_table(rows));
        out << csv;
        if (!c.out.empty()) {
            fs::create_directories(c.out);
            write_text(fs::path(c.out) / "bench.csv", csv);
        }
    }
    if (failed) throw CheckFailed(why);
    return ok;
}

int cmd_fuse_eval(const ScenarioArgs& a, std::ostream& out, std::ostream&) {
    if (a.in.empty()) throw CLI::RequiredError("--in");
    const fs::path dir = require_out(a.common);
    const StageInput in = read_stage(a.in);
    const Scene scene = build_scene(in.config, in.seed);
    const auto integrals = load_integrals(fs::path(a.in) / "integrals");
    const auto r = fuse_and_evaluate(integrals, scene.dem, in.persons, in.config);
    write_stage(dir, in.config, in.record);
    write_fusion(dir, in.config, integrals, scene.dem, in.persons, r);
    print_report(r.report, out);
    if (a.common.check) check_fusion(r.report);
    return ok;
}

int cmd_run(const ScenarioArgs& a, std::ostream& out, std::ostream&) {
    const std::uint64_t seed = require_seed(a.common);
    const fs::path dir = require_out(a.common);
    const ScenarioConfig config = scenario_config(a);
    const RunResult r = run_end_to_end(config, seed);
    const Json record = scene_record(r.scene, config, seed);
    write_stage(dir / "simulate", config, record);
    save_frames(dir / "simulate" / "frames", r.frames);
    write_stage(dir / "integrate", config, record);
    save_integrals(dir / "integrate" / "integrals", r.integrals);
    write_stage(dir / "fuse", config, record);
    write_fusion(dir / "fuse", config, r.integrals, r.scene.dem, r.scene.persons, r.fusion);
    print_report(r.fusion.report, out);
    if (a.common.check) check_fusion(r.fusion.report);
    return ok;
}

void add_scenario_options(CLI::App* cmd, ScenarioArgs& s) {
    add_common(cmd, s.common);
    cmd->add_option("--preset", s.preset, "open_field or dense_forest");
    cmd->add_option("--v-f", s.v_f, "flying speed, m/s");
    cmd->add_option("--resolution", s.resolution, "image width in pixels");
    cmd->add_option("--persons", s.persons, "number of persons");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic-aperture scan planning, simulation, integration and detection fusion", "synap"};
    app.require_subcommand(1);

    PlanArgs plan;
    auto* p = app.add_subcommand("plan", "sampling quantities for a sweep of flying speeds");
    add_common(p, plan.common);
    p->add_option("--v-f", plan.v_f, "flying speeds to sweep, m/s (may be empty)")->expected(0, -1);
    p->add_option("--t-p", plan.flight.t_p, "processing time per integral, s");
    p->add_option("--t-i", plan.flight.t_i, "imaging time per frame, s");
    p->add_option("--altitude", plan.flight.h, "altitude above ground, m");
    p->add_option("--fov", plan.flight.fov, "field of view, degrees");
    p->add_option("--d-i", plan.flight.d_i, "single-image sampling distance, m");
    p->add_option("--d-i1", plan.d_i1, "sampling distance at h to rescale, m");
    p->add_option("--h2", plan.h2, "altitude to rescale the sampling distance to, m");

    OcclusionArgs occ;
    auto* o = app.add_subcommand("occlusion", "closed-form occlusion density against the ray-casting oracle");
    add_common(o, occ.common);
    o->add_option("--d", occ.params.d, "per-layer occluder density");
    o->add_option("--o", occ.params.o, "occluder size, m");
    o->add_option("--l", occ.params.l, "occlusion volume height, m");
    o->add_option("--alpha", occ.alpha, "viewing angles, degrees")->expected(0, -1);
    o->add_option("--rays", occ.rays, "oracle rays per angle");

    ScenarioArgs sim;
    auto* s = app.add_subcommand("simulate", "generate a scene and fly the scan");
    add_scenario_options(s, sim);

    IntegrateArgs integ;
    auto* i = app.add_subcommand("integrate", "sliding-window integrals of a simulated scan, and the renderer benchmark");
    add_common(i, integ.scenario.common);
    i->add_option("--in", integ.scenario.in, "simulate output directory");
    i->add_flag("--classical", integ.classical, "use classical instead of deferred rendering");
    i->add_flag("--bench", integ.bench, "time classical and deferred rendering");
    i->add_option("--bench-n", integ.bench_config.n_values, "frames per integral")->expected(1, -1);
    i->add_option("--bench-vertices", integ.bench_config.vertex_counts, "DEM vertex counts")->expected(1, -1);
    i->add_option("--bench-repetitions", integ.bench_config.repetitions, "timed integrals per point");
    i->add_option("--bench-warmups", integ.bench_config.warmups, "untimed integrals per point");
    i->add_option("--bench-resolution", integ.bench_config.resolution, "integral width in pixels");

    ScenarioArgs fuse;
    auto* f = app.add_subcommand("fuse-eval", "detect, fuse and evaluate integrals");
    add_common(f, fuse.common);
    f->add_option("--in", fuse.in, "integrate output directory");

    ScenarioArgs whole;
    auto* r = app.add_subcommand("run", "simulate, integrate and fuse-eval in one process");
    add_scenario_options(r, whole);

    std::vector<const char*> argv{"synap"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (*p) {
            // A bare --v-f is an empty sweep.
            const auto& sweep = p->get_option("--v-f")->results();
            if (p->count("--v-f") > 0 && std::all_of(sweep.begin(), sweep.end(), [](const std::string& v) { return v.empty(); })) {
                plan.v_f.clear();
            }
            if (!plan.common.config.empty()) {
                const ScenarioConfig c = load_config(plan.common.config);
                if (p->count("--t-p") == 0) plan.flight.t_p = c.flight.t_p;
                if (p->count("--t-i") == 0) plan.flight.t_i = c.flight.t_i;
                if (p->count("--altitude") == 0) plan.flight.h = c.flight.h;
                if (p->count("--fov") == 0) plan.flight.fov = c.flight.fov;
                if (p->count("--d-i") == 0) plan.flight.d_i = c.flight.d_i;
            }
            return cmd_plan(plan, out, err);
        }
        if (*o) {
            if (!occ.common.config.empty()) {
                const ScenarioConfig c = load_config(occ.common.config);
                if (o->count("--d") == 0) occ.params.d = c.occlusion.d;
                if (o->count("--o") == 0) occ.params.o = c.occlusion.o;
                if (o->count("--l") == 0) occ.params.l = c.occlusion.l;
            }
            return cmd_occlusion(occ, out, err);
        }
        if (*s) return cmd_simulate(sim, out, err);
        if (*i) return cmd_integrate(integ, out, err);
        if (*f) return cmd_fuse_eval(fuse, out, err);
        if (*r) return cmd_run(whole, out, err);
    } catch (const CheckFailed& e) {
        err << "check failed: " << e.what() << '\n';
        return check_failed;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return domain;
    }
    return usage;
}

}  // namespace synap::cli
