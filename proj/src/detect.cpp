#include "synap/detect.hpp"

#include <algorithm>

#include "synap/common.hpp"

namespace synap {

std::vector<Detection> detect(const IntegralImage& integral, const DetectorConfig& config) {
    if (!(config.person > config.baseline)) throw DomainError("person intensity must exceed the baseline");
    if (config.min_area < 1) throw DomainError("min_area must be positive");
    if (config.max_area < 0) throw DomainError("max_area must be non-negative");
    const int w = integral.width;
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(w);
    std::vector<std::uint8_t> hot(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        hot[i] = integral.count[i] > 0 && integral.pixels[i] >= config.threshold;
    }

    std::vector<Detection> out;
    std::vector<int> stack;
    for (int row = 0; row < w; ++row) {
        for (int col = 0; col < w; ++col) {
            const std::size_t start = integral.index(col, row);
            if (!hot[start]) continue;
            hot[start] = 0;
            stack.assign(1, static_cast<int>(start));
            Aabb box{col, row, col, row};
            double sum = 0;
            int area = 0;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int pc = p % w;
                const int pr = p / w;
                sum += integral.pixels[static_cast<std::size_t>(p)];
                ++area;
                box.c0 = std::min(box.c0, pc);
                box.c1 = std::max(box.c1, pc);
                box.r0 = std::min(box.r0, pr);
                box.r1 = std::max(box.r1, pr);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nc = pc + dc;
                        const int nr = pr + dr;
                        if (nc < 0 || nc >= w || nr < 0 || nr >= w) continue;
                        const std::size_t q = integral.index(nc, nr);
                        if (!hot[q]) continue;
                        hot[q] = 0;
                        stack.push_back(static_cast<int>(q));
                    }
                }
            }
            if (area < config.min_area || (config.max_area > 0 && area > config.max_area)) continue;
            const double mean = sum / area;
            const double score = std::clamp((mean - config.baseline) / (config.person - config.baseline), 0.0, 1.0);
            out.push_back({box, score, area});
        }
    }
    return out;
}

}  // namespace synap
