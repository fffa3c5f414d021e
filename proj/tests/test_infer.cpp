#include <doctest.h>

#include <cmath>

#include "awi/augment.hpp"
#include "awi/dataset.hpp"
#include "awi/descriptor.hpp"
#include "awi/errors.hpp"
#include "awi/infer.hpp"
#include "helpers.hpp"

using namespace awi;
using namespace awi::testutil;

namespace {

ModelArch tiny_arch() {
    ModelArch a;
    a.frame_dim = 7;
    a.descriptor_dim = 5;
    a.k = 1;
    a.hidden = 16;
    return a;
}

Sample arch_sample(Rng& rng, const ModelArch& arch, SampleOrigin origin) {
    Sample s;
    s.demo.origin = origin;
    s.demo.source_trajectory = random_trajectory(rng, 6, arch.k);
    for (int f = 0; f < arch.demo_frames; ++f) {
        std::vector<double> frame;
        for (int i = 0; i < arch.frame_dim; ++i) frame.push_back(rng.uniform(-1, 1));
        s.demo.frames.push_back(std::move(frame));
    }
    for (int i = 0; i < arch.descriptor_dim; ++i)
        s.instance_descriptor.vector.push_back(rng.uniform(-1, 1));
    s.target = random_trajectory(rng, 8, arch.k);
    s.origin = origin;
    s.task_id = origin == SampleOrigin::Task ? 0 : -1;
    return s;
}

}  // namespace

TEST_CASE("predict: deterministic, finite, and head-separated") {
    Rng rng(91);
    const ModelArch arch = tiny_arch();
    const PredictorModel model = PredictorModel::initialize(arch, 5);
    const Sample s = arch_sample(rng, arch, SampleOrigin::Task);

    const auto p1 = model.predict(s.demo, s.instance_descriptor);
    const auto p2 = model.predict(s.demo, s.instance_descriptor);
    CHECK(p1.task_head == p2.task_head);
    CHECK(p1.synth_head == p2.synth_head);
    CHECK(p1.task_head != p1.synth_head);  // heads initialized independently
    for (const auto& w : p1.task_head) CHECK(w.position.finite());
    CHECK(p1.execution_waypoints().size() == 5);
    CHECK(p1.execution_waypoints()[0] == p1.task_head[10]);
}

TEST_CASE("predict: zeroed head outputs the origin for every waypoint") {
    Rng rng(92);
    const ModelArch arch = tiny_arch();
    PredictorModel model = PredictorModel::initialize(arch, 5);
    // Zero the task head entirely.
    const std::size_t w_off = model.head_w_off(SampleOrigin::Task);
    const std::size_t b_off = model.head_b_off(SampleOrigin::Task);
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(arch.output_dim()) * arch.hidden; ++i)
        model.params[w_off + i] = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(arch.output_dim()); ++i)
        model.params[b_off + i] = 0.0;

    const Sample s = arch_sample(rng, arch, SampleOrigin::Task);
    const auto p = model.predict(s.demo, s.instance_descriptor);
    for (const auto& w : p.task_head) {
        CHECK(w.position == Vec3{0, 0, 0});
        CHECK(w.attributes[0] == 0.0);
    }
}

TEST_CASE("predict: dimension mismatch rejected") {
    Rng rng(93);
    const ModelArch arch = tiny_arch();
    const PredictorModel model = PredictorModel::initialize(arch, 5);
    ModelArch other = arch;
    other.frame_dim = 9;
    const Sample s = arch_sample(rng, other, SampleOrigin::Task);
    CHECK_THROWS_AS(model.predict(s.demo, s.instance_descriptor), InvalidInput);
}

TEST_CASE("gradient: head isolation is exact") {
    Rng rng(94);
    const ModelArch arch = tiny_arch();
    PredictorModel model = PredictorModel::initialize(arch, 6);
    const Sample s = arch_sample(rng, arch, SampleOrigin::Task);

    PredictorModel::Cache cache;
    const auto out = model.forward(
        model.flatten_input(s.demo, s.instance_descriptor), SampleOrigin::Task, cache);
    std::vector<double> dout(out.size());
    for (auto& v : dout) v = rng.uniform(-1, 1);
    std::vector<double> grad(model.param_count(), 0.0);
    model.backward(cache, SampleOrigin::Task, dout, grad);

    const std::size_t synth_w = model.head_w_off(SampleOrigin::Synthesized);
    const std::size_t synth_end = model.param_count();
    for (std::size_t i = synth_w; i < synth_end; ++i) CHECK(grad[i] == 0.0);
    // And the trunk saw gradients.
    double trunk_mass = 0.0;
    for (std::size_t i = 0; i < model.b1_off(); ++i) trunk_mass += std::abs(grad[i]);
    CHECK(trunk_mass > 0.0);
}

TEST_CASE("training gradient matches finite differences through the full loss") {
    Rng rng(95);
    const ModelArch arch = tiny_arch();
    PredictorModel model = PredictorModel::initialize(arch, 7);
    const Sample s = arch_sample(rng, arch, SampleOrigin::Task);
    SdtwConfig sdtw_cfg;
    sdtw_cfg.gamma = 0.001;
    const int sps = 3;

    const auto loss_of = [&](const PredictorModel& m) {
        PredictorModel::Cache cache;
        const auto out = m.forward(m.flatten_input(s.demo, s.instance_descriptor),
                                   SampleOrigin::Task, cache);
        std::vector<AttributedWaypoint> wps(kTotalWaypoints);
        for (int i = 0; i < kTotalWaypoints; ++i) {
            const double* row = out.data() + static_cast<std::size_t>(i) * 4;
            wps[static_cast<std::size_t>(i)] = {{row[0], row[1], row[2]}, {row[3]}};
        }
        return multiresolution_loss(wps, s.target, sdtw_cfg, sps).loss;
    };

    // Analytic gradient.
    PredictorModel::Cache cache;
    const auto out = model.forward(
        model.flatten_input(s.demo, s.instance_descriptor), SampleOrigin::Task, cache);
    std::vector<AttributedWaypoint> wps(kTotalWaypoints);
    for (int i = 0; i < kTotalWaypoints; ++i) {
        const double* row = out.data() + static_cast<std::size_t>(i) * 4;
        wps[static_cast<std::size_t>(i)] = {{row[0], row[1], row[2]}, {row[3]}};
    }
    const auto loss = multiresolution_loss(wps, s.target, sdtw_cfg, sps);
    std::vector<double> dout(static_cast<std::size_t>(arch.output_dim()));
    for (int w = 0; w < kTotalWaypoints; ++w)
        for (int c = 0; c < 4; ++c)
            dout[static_cast<std::size_t>(w * 4 + c)] = loss.waypoint_gradient(w, c);
    std::vector<double> grad(model.param_count(), 0.0);
    model.backward(cache, SampleOrigin::Task, dout, grad);

    // Spot-check 20 random parameters against central differences.
    const double h = 1e-6;
    for (int probe = 0; probe < 20; ++probe) {
        const std::size_t p = rng.uniform_index(model.param_count());
        PredictorModel hi = model, lo = model;
        hi.params[p] += h;
        lo.params[p] -= h;
        const double fd = (loss_of(hi) - loss_of(lo)) / (2 * h);
        const double scale = std::max({std::abs(fd), std::abs(grad[p]), 1e-6});
        CHECK(std::abs(fd - grad[p]) / scale <= 1e-3);
    }
}

TEST_CASE("train: loss decreases and the curve is reproducible bit for bit") {
    Rng rng(96);
    const ModelArch arch = tiny_arch();
    std::vector<Sample> data;
    for (int i = 0; i < 6; ++i) data.push_back(arch_sample(rng, arch, SampleOrigin::Task));

    TrainConfig cfg;
    cfg.iterations = 150;
    cfg.batch_size = 4;
    cfg.seed = 11;
    cfg.parallel = false;

    PredictorModel m1 = PredictorModel::initialize(arch, 11);
    const auto r1 = train(m1, data, cfg);
    CHECK(r1.loss_decreased);
    CHECK(r1.loss_curve.size() == 150);

    PredictorModel m2 = PredictorModel::initialize(arch, 11);
    const auto r2 = train(m2, data, cfg);
    CHECK(r1.loss_curve == r2.loss_curve);
    CHECK(m1.params == m2.params);
}

TEST_CASE("train: single repeated sample approaches the direct waypoint fit") {
    Rng rng(97);
    const ModelArch arch = tiny_arch();
    const Sample s = arch_sample(rng, arch, SampleOrigin::Task);
    const std::vector<Sample> data{s};

    SdtwConfig sdtw_cfg;
    const int sps = 5;

    // Direct-fit oracle: optimize the 15 waypoints themselves by plain
    // gradient descent with the same loss.
    auto waypoints = random_waypoints(rng, kTotalWaypoints);
    double direct_loss = 0.0;
    for (int it = 0; it < 3000; ++it) {
        const auto res = multiresolution_loss(waypoints, s.target, sdtw_cfg, sps);
        direct_loss = res.loss;
        for (int w = 0; w < kTotalWaypoints; ++w)
            for (int c = 0; c < 4; ++c)
                waypoints[static_cast<std::size_t>(w)].set_channel(
                    c, waypoints[static_cast<std::size_t>(w)].channel(c) -
                           0.05 * res.waypoint_gradient(w, c));
    }

    TrainConfig cfg;
    cfg.iterations = 2000;
    cfg.batch_size = 1;
    cfg.samples_per_segment = sps;
    cfg.seed = 3;
    cfg.learning_rate = 2e-3;
    cfg.parallel = false;
    PredictorModel model = PredictorModel::initialize(arch, 3);
    const auto res = train(model, data, cfg);

    // Within 5% of the directly fitted waypoint loss (both near the same
    // optimum of the same objective).
    const double tail = res.loss_curve.back();
    CHECK(tail <= direct_loss + 0.05 * std::abs(direct_loss) + 1e-3);
}

TEST_CASE("train: synthesized samples only touch the synth head") {
    Rng rng(98);
    const ModelArch arch = tiny_arch();
    std::vector<Sample> data;
    for (int i = 0; i < 4; ++i) data.push_back(arch_sample(rng, arch, SampleOrigin::Synthesized));

    PredictorModel model = PredictorModel::initialize(arch, 13);
    const std::vector<double> before(
        model.params.begin() + static_cast<std::ptrdiff_t>(model.head_w_off(SampleOrigin::Task)),
        model.params.begin() + static_cast<std::ptrdiff_t>(model.head_w_off(SampleOrigin::Synthesized)));

    TrainConfig cfg;
    cfg.iterations = 30;
    cfg.batch_size = 2;
    cfg.parallel = false;
    train(model, data, cfg);

    const std::vector<double> after(
        model.params.begin() + static_cast<std::ptrdiff_t>(model.head_w_off(SampleOrigin::Task)),
        model.params.begin() + static_cast<std::ptrdiff_t>(model.head_w_off(SampleOrigin::Synthesized)));
    CHECK(before == after);
}

TEST_CASE("model save/load round trip") {
    const ModelArch arch = tiny_arch();
    const PredictorModel model = PredictorModel::initialize(arch, 21);
    const auto path = std::filesystem::temp_directory_path() / "awi_test_model.json";
    save_model(model, path);
    const PredictorModel loaded = load_model(path);
    CHECK(loaded.arch == model.arch);
    CHECK(loaded.params == model.params);
    std::filesystem::remove(path);
}

TEST_CASE("evaluate: oracle upper bound on a small run") {
    SimConfig sim_cfg;
    EvalConfig cfg;
    cfg.episodes_per_task = 5;
    cfg.seed = 400;
    cfg.parallel = false;
    const auto res = evaluate(nullptr, {2, 9}, cfg, sim_cfg);
    REQUIRE(res.per_task.size() == 2);
    CHECK(res.mean_success >= 0.8);
}

TEST_CASE("evaluate: untrained model is near zero") {
    SimConfig sim_cfg;
    // Arch must match what evaluation builds internally: descriptor 72, k=1.
    ModelArch arch;
    arch.frame_dim = DescriptorLayout{}.dim() + 4;
    arch.descriptor_dim = DescriptorLayout{}.dim();
    const PredictorModel model = PredictorModel::initialize(arch, 77);
    EvalConfig cfg;
    cfg.episodes_per_task = 5;
    cfg.seed = 401;
    cfg.parallel = false;
    const auto res = evaluate(&model, {4}, cfg, sim_cfg);
    CHECK(res.mean_success <= 0.2);
}
