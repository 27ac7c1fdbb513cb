#include "hcg/synth.hpp"

#include "hcg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcg {

namespace {

constexpr double kW = kSynthCanvasWidth;
constexpr double kH = kSynthCanvasHeight;

std::string image_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "img_%06d", index);
    return buf;
}

std::string class_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "class_%02d", index);
    return buf;
}

// Place a box of the requested area ratio fully inside the canvas. The
// aspect-ratio window is clamped to the feasible interval, so placement
// succeeds on the first try except for pathological ratios.
Box place_box(Rng& rng, double area_ratio) {
    double area = area_ratio * kW * kH;
    for (int attempt = 0; attempt < 100; ++attempt) {
        double q_lo = std::max(0.5, area / (kH * kH));
        double q_hi = std::min(2.0, kW * kW / area);
        if (q_lo > q_hi) {
            q_lo = area / (kH * kH);
            q_hi = kW * kW / area;
        }
        double q = rng.uniform(q_lo, q_hi);
        double w = std::sqrt(area * q);
        double h = area / w;
        if (!(w > 0.0) || !(h > 0.0) || w > kW || h > kH) continue;
        double x0 = rng.uniform(0.0, kW - w);
        double y0 = rng.uniform(0.0, kH - h);
        Box b{x0, y0, x0 + w, y0 + h};
        if (b.valid()) return b;
    }
    throw std::runtime_error("synth: infeasible box placement for area ratio " +
                             std::to_string(area_ratio));
}

double band_draw(Rng& rng, const ScoreBand& band) { return rng.uniform(band.lo, band.hi); }

std::vector<double> score_vector(Rng& rng, int class_count, int top_class, double top_score,
                                 double other_hi) {
    std::vector<double> scores(static_cast<std::size_t>(class_count));
    for (int c = 0; c < class_count; ++c) {
        scores[c] = c == top_class ? top_score : rng.uniform(0.0, other_hi);
    }
    return scores;
}

void validate_config(const SynthConfig& c) {
    if (c.image_count <= 0 || c.class_count <= 0) throw std::invalid_argument("synth: bad sizes");
    if (c.count_weights.empty() || c.noise_count_weights.empty())
        throw std::invalid_argument("synth: empty weight vectors");
    if (!(c.area_lo > 0.0 && c.area_lo < c.area_hi && c.area_hi < 1.0))
        throw std::invalid_argument("synth: bad area ratio range");
    if (!(c.big_recall > 0.0 && c.big_recall <= 1.0))
        throw std::invalid_argument("synth: big_recall must be in (0, 1]");
}

struct ImagePlan {
    std::vector<int> classes;
    std::vector<Box> boxes;
    std::vector<bool> missed;
    bool phantom = false;  // one extra high-scoring false-positive box
};

// Emit truth + small + big for one planned image.
void emit_image(Rng& rng, const SynthConfig& cfg, const std::string& id, const ImagePlan& plan,
                Dataset& out) {
    GroundTruth gt;
    gt.image_id = id;
    gt.width = kSynthCanvasWidth;
    gt.height = kSynthCanvasHeight;
    for (std::size_t i = 0; i < plan.boxes.size(); ++i) {
        gt.objects.push_back({plan.classes[i], plan.boxes[i]});
    }

    DetectionRecord small;
    small.image_id = id;
    small.width = kSynthCanvasWidth;
    small.height = kSynthCanvasHeight;
    for (std::size_t i = 0; i < plan.boxes.size(); ++i) {
        double top = plan.missed[i] ? band_draw(rng, cfg.missed_band) : band_draw(rng, cfg.detected_band);
        small.raw.push_back({plan.boxes[i], score_vector(rng, cfg.class_count, plan.classes[i], top, 0.05)});
    }
    if (plan.phantom) {
        Box pb = place_box(rng, rng.uniform(0.10, 0.30));
        int pc = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.class_count)));
        small.raw.push_back(
            {pb, score_vector(rng, cfg.class_count, pc, band_draw(rng, cfg.detected_band), 0.05)});
    }
    int noise_count = static_cast<int>(rng.categorical(cfg.noise_count_weights));
    for (int i = 0; i < noise_count; ++i) {
        Box nb = place_box(rng, rng.uniform(0.001, 0.02));
        int nc = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.class_count)));
        small.raw.push_back({nb, score_vector(rng, cfg.class_count, nc,
                                              band_draw(rng, cfg.noise_band), cfg.noise_band.lo)});
    }

    DetectionRecord big;
    big.image_id = id;
    big.width = kSynthCanvasWidth;
    big.height = kSynthCanvasHeight;
    for (std::size_t i = 0; i < plan.boxes.size(); ++i) {
        bool detected = !plan.missed[i] || rng.next_double() < cfg.big_recall;
        if (detected) {
            big.raw.push_back({plan.boxes[i], score_vector(rng, cfg.class_count, plan.classes[i],
                                                           band_draw(rng, cfg.detected_band), 0.05)});
        }
    }

    out.truths.emplace(id, std::move(gt));
    out.small_traces.emplace(id, std::move(small));
    out.big_traces.emplace(id, std::move(big));
}

ImagePlan sample_objects(Rng& rng, const SynthConfig& cfg) {
    ImagePlan plan;
    int count = 1 + static_cast<int>(rng.categorical(cfg.count_weights));
    for (int i = 0; i < count; ++i) {
        plan.classes.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.class_count))));
        plan.boxes.push_back(place_box(rng, rng.uniform(cfg.area_lo, cfg.area_hi)));
    }
    plan.missed.assign(plan.boxes.size(), false);
    return plan;
}

// Area ratio as downstream consumers recompute it, so threshold comparisons
// agree bit-for-bit with the generator's decisions.
double actual_ratio(const Box& b) { return b.area() / (kW * kH); }

Dataset init_dataset(const SynthConfig& cfg) {
    Dataset ds;
    for (int c = 0; c < cfg.class_count; ++c) ds.class_names.push_back(class_name(c));
    return ds;
}

} // namespace

Dataset generate(const SynthConfig& config) {
    validate_config(config);
    Rng rng(config.seed);
    Dataset ds = init_dataset(config);
    for (int i = 0; i < config.image_count; ++i) {
        ImagePlan plan = sample_objects(rng, config);
        int count = static_cast<int>(plan.boxes.size());
        for (int k = 0; k < count; ++k) {
            double p = config.miss_a - config.miss_b * actual_ratio(plan.boxes[k]) +
                       config.miss_c * (count - 1);
            p = std::clamp(p, 0.0, 1.0);
            plan.missed[k] = rng.next_double() < p;
        }
        emit_image(rng, config, image_name(i), plan, ds);
    }
    return ds;
}

Dataset generate_planted(const SynthConfig& config, int tau_n_star, double tau_a_star) {
    validate_config(config);
    if (tau_n_star < 0 || !(tau_a_star > 0.0 && tau_a_star < 1.0))
        throw std::invalid_argument("synth: bad planted thresholds");

    Rng rng(config.seed);
    Dataset ds = init_dataset(config);

    // Four pinned images make (tau_n_star, tau_a_star) the unique grid
    // optimum: anything below tau_n_star mislabels the phantom image with
    // exactly tau_n_star objects, anything above misses the big-object image
    // with tau_n_star + 1 of them, and the two near-boundary area ratios
    // squeeze tau_a from both sides.
    auto pinned_plan = [&](const std::vector<double>& ratios, bool phantom, bool difficult) {
        ImagePlan plan;
        for (double r : ratios) {
            plan.classes.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(config.class_count))));
            plan.boxes.push_back(place_box(rng, r));
        }
        plan.missed.assign(plan.boxes.size(), false);
        plan.phantom = phantom;
        if (difficult) {
            std::size_t smallest = 0;
            for (std::size_t k = 1; k < plan.boxes.size(); ++k) {
                if (plan.boxes[k].area() < plan.boxes[smallest].area()) smallest = k;
            }
            plan.missed[smallest] = true;
        }
        return plan;
    };

    int produced = 0;
    if (config.image_count >= 4) {
        double a = tau_a_star;
        std::vector<ImagePlan> pinned;
        {
            std::vector<double> r1;
            for (int k = 0; k < tau_n_star; ++k) r1.push_back(std::min(0.9, a + 0.09 + 0.1 * k));
            if (r1.empty()) r1.push_back(a + 0.09);  // degenerate tau_n_star = 0
            pinned.push_back(pinned_plan(r1, true, false));
        }
        pinned.push_back(pinned_plan({a + 0.005}, true, false));
        {
            std::vector<double> r3;
            for (int k = 0; k <= tau_n_star; ++k) r3.push_back(std::min(0.9, 0.55 + 0.05 * k));
            pinned.push_back(pinned_plan(r3, false, true));
        }
        pinned.push_back(pinned_plan({a - 0.005, std::min(0.9, a + 0.14)}, false, true));
        for (ImagePlan& plan : pinned) {
            emit_image(rng, config, image_name(produced), plan, ds);
            ++produced;
        }
    }

    for (; produced < config.image_count; ++produced) {
        ImagePlan plan = sample_objects(rng, config);
        double min_ratio = 1.0;
        std::size_t smallest = 0;
        for (std::size_t k = 0; k < plan.boxes.size(); ++k) {
            double r = actual_ratio(plan.boxes[k]);
            if (r < min_ratio) {
                min_ratio = r;
                smallest = k;
            }
        }
        bool difficult = static_cast<int>(plan.boxes.size()) > tau_n_star || min_ratio < tau_a_star;
        if (difficult) plan.missed[smallest] = true;
        emit_image(rng, config, image_name(produced), plan, ds);
    }
    return ds;
}

} // namespace hcg
