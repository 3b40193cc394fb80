#include "synap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synap/common.hpp"

namespace synap {

namespace {

bool near_person(double x, double y, std::span<const Person> persons, double r_match) {
    for (const auto& p : persons) {
        if (std::hypot(x - p.x, y - p.y) <= r_match) return true;
    }
    return false;
}

}  // namespace

double separation_ratio(std::span<const double> true_scores, std::span<const double> false_scores) {
    if (true_scores.empty()) return 0.0;
    if (false_scores.empty()) return std::numeric_limits<double>::infinity();
    const double lo = *std::min_element(true_scores.begin(), true_scores.end());
    const double hi = *std::max_element(false_scores.begin(), false_scores.end());
    if (hi == 0.0) return lo > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    return lo / hi;
}

ScoreCurve score_curve(std::span<const double> scores) {
    if (scores.size() < 2) throw DomainError("a score curve needs at least two scores");
    ScoreCurve c;
    c.sorted.assign(scores.begin(), scores.end());
    std::sort(c.sorted.begin(), c.sorted.end());
    for (std::size_t i = 1; i < c.sorted.size(); ++i) {
        c.max_gradient = std::max(c.max_gradient, c.sorted[i] - c.sorted[i - 1]);
    }
    return c;
}

std::vector<LabeledScore> fused_detections(const ConfidenceMap& map, Method method,
                                           std::span<const Person> persons, double r_match) {
    const int cols = map.cols();
    const int rows = map.rows();
    const auto m = static_cast<std::size_t>(method);
    auto lit = [&](int ix, int iy) {
        const FusedCell& c = map.cell(ix, iy);
        return c.finalized && !c.partial && c.value[m] > 0.0;
    };
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows), 0);
    std::vector<LabeledScore> out;
    std::vector<std::pair<int, int>> stack;
    for (int iy = 0; iy < rows; ++iy) {
        for (int ix = 0; ix < cols; ++ix) {
            const std::size_t k = static_cast<std::size_t>(iy) * cols + ix;
            if (seen[k] || !lit(ix, iy)) continue;
            seen[k] = 1;
            stack.assign(1, {ix, iy});
            LabeledScore best{-1.0, false, 0, 0};
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                const double v = map.cell(cx, cy).value[m];
                if (v > best.score) best = {v, false, map.center_x(cx), map.center_y(cy)};
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (nx < 0 || nx >= cols || ny < 0 || ny >= rows) continue;
                        const std::size_t q = static_cast<std::size_t>(ny) * cols + nx;
                        if (seen[q] || !lit(nx, ny)) continue;
                        seen[q] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
            best.truth = near_person(best.x, best.y, persons, r_match);
            out.push_back(best);
        }
    }
    return out;
}

std::vector<LabeledScore> single_detections(std::span<const IntegralImage> integrals,
                                            std::span<const std::vector<Detection>> detections,
                                            const Dem& dem, std::span<const Person> persons, double r_match) {
    if (integrals.size() != detections.size()) throw DomainError("one detection list per integral expected");
    std::vector<LabeledScore> out;
    for (std::size_t k = 0; k < integrals.size(); ++k) {
        const PinholeCamera cam(integrals[k].center_pose.position, integrals[k].fov, integrals[k].width);
        for (const auto& d : detections[k]) {
            const Vec3 dir = cam.ray_direction(0.5 * (d.box.c0 + d.box.c1 + 1), 0.5 * (d.box.r0 + d.box.r1 + 1));
            const auto t = dem.intersect(cam.position(), dir);
            LabeledScore s{d.score, false, 0, 0};
            if (t) {
                const Vec3 g = cam.position() + (*t) * dir;
                s.x = g.x;
                s.y = g.y;
                s.truth = near_person(g.x, g.y, persons, r_match);
            }
            out.push_back(s);
        }
    }
    return out;
}

std::optional<Aabb> person_box(const Person& person, const IntegralImage& integral, const Dem& dem) {
    if (!dem.contains(person.x, person.y)) return std::nullopt;
    const PinholeCamera cam(integral.center_pose.position, integral.fov, integral.width);
    const double z = dem.height_at(person.x, person.y);
    const auto c = cam.project({person.x, person.y, z});
    const int w = integral.width;
    if (!c || !(c->u >= 0 && c->u < w && c->v >= 0 && c->v < w)) return std::nullopt;
    if (!integral.valid(static_cast<int>(c->u), static_cast<int>(c->v))) return std::nullopt;
    double u0 = c->u, u1 = c->u, v0 = c->v, v1 = c->v;
    for (const double dx : {-person.radius, person.radius}) {
        for (const double dy : {-person.radius, person.radius}) {
            const auto p = cam.project({person.x + dx, person.y + dy, z});
            if (!p) continue;
            u0 = std::min(u0, p->u);
            u1 = std::max(u1, p->u);
            v0 = std::min(v0, p->v);
            v1 = std::max(v1, p->v);
        }
    }
    Aabb box;
    box.c0 = std::clamp(static_cast<int>(std::floor(u0)), 0, w - 1);
    box.c1 = std::clamp(static_cast<int>(std::floor(u1)), 0, w - 1);
    box.r0 = std::clamp(static_cast<int>(std::floor(v0)), 0, w - 1);
    box.r1 = std::clamp(static_cast<int>(std::floor(v1)), 0, w - 1);
    return box;
}

std::vector<int> count_appearances(std::span<const Person> persons, std::span<const IntegralImage> integrals,
                                   std::span<const std::vector<Detection>> detections, const Dem& dem) {
    if (integrals.size() != detections.size()) throw DomainError("one detection list per integral expected");
    std::vector<int> counts(persons.size(), 0);
    for (std::size_t p = 0; p < persons.size(); ++p) {
        for (std::size_t k = 0; k < integrals.size(); ++k) {
            const auto box = person_box(persons[p], integrals[k], dem);
            if (!box) continue;
            for (const auto& d : detections[k]) {
                if (d.box.overlaps(*box)) {
                    ++counts[p];
                    break;
                }
            }
        }
    }
    return counts;
}

MethodReport evaluate_scores(const std::string& name, std::span<const LabeledScore> scores,
                             std::span<const Person> persons, double r_match) {
    MethodReport r;
    r.method = name;
    std::vector<double> t, f, all;
    for (const auto& s : scores) {
        (s.truth ? t : f).push_back(s.score);
        all.push_back(s.score);
    }
    r.true_count = t.size();
    r.false_count = f.size();
    r.min_true = t.empty() ? 0.0 : *std::min_element(t.begin(), t.end());
    r.max_false = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
    r.ratio = separation_ratio(t, f);
    if (all.size() >= 2) {
        const auto c = score_curve(all);
        r.curve = c.sorted;
        r.max_gradient = c.max_gradient;
    } else {
        r.curve = all;
    }
    for (int k = 1; k <= 19; ++k) {
        const double tau = 0.05 * k;
        std::size_t pos = 0, tp = 0;
        std::vector<std::uint8_t> found(persons.size(), 0);
        for (const auto& s : scores) {
            if (s.score < tau) continue;
            ++pos;
            if (!s.truth) continue;
            ++tp;
            for (std::size_t p = 0; p < persons.size(); ++p) {
                if (std::hypot(s.x - persons[p].x, s.y - persons[p].y) <= r_match) found[p] = 1;
            }
        }
        PrPoint pt;
        pt.threshold = tau;
        pt.precision = pos ? static_cast<double>(tp) / pos : 1.0;
        pt.recall = persons.empty() ? 1.0
                                    : static_cast<double>(std::count(found.begin(), found.end(), 1)) / persons.size();
        r.pr.push_back(pt);
    }
    return r;
}

}  // namespace synap
