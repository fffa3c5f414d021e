#include "awi/infer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "awi/descriptor.hpp"
#include "awi/dataset.hpp"
#include "awi/errors.hpp"
#include "awi/serialize.hpp"

namespace awi {

std::vector<AttributedWaypoint> WaypointPrediction::execution_waypoints() const {
    const int offset = resolution_offset(kResolutionHeads - 1);
    return {task_head.begin() + offset, task_head.end()};
}

std::size_t PredictorModel::w1_off() const { return 0; }
std::size_t PredictorModel::b1_off() const {
    return static_cast<std::size_t>(arch.hidden) * arch.input_dim();
}
std::size_t PredictorModel::w2_off() const { return b1_off() + arch.hidden; }
std::size_t PredictorModel::b2_off() const {
    return w2_off() + static_cast<std::size_t>(arch.hidden) * arch.hidden;
}
std::size_t PredictorModel::head_w_off(SampleOrigin head) const {
    const std::size_t base = b2_off() + arch.hidden;
    const std::size_t head_size =
        static_cast<std::size_t>(arch.output_dim()) * arch.hidden + arch.output_dim();
    return head == SampleOrigin::Task ? base : base + head_size;
}
std::size_t PredictorModel::head_b_off(SampleOrigin head) const {
    return head_w_off(head) + static_cast<std::size_t>(arch.output_dim()) * arch.hidden;
}
std::size_t PredictorModel::param_count() const {
    return head_b_off(SampleOrigin::Synthesized) + arch.output_dim();
}

PredictorModel PredictorModel::initialize(const ModelArch& arch, std::uint64_t seed) {
    PredictorModel m;
    m.arch = arch;
    m.params.assign(m.param_count(), 0.0);
    Rng rng(seed);
    const auto fill = [&](std::size_t off, int rows, int cols) {
        const double s = std::sqrt(6.0 / (rows + cols));
        for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i)
            m.params[off + i] = rng.uniform(-s, s);
    };
    fill(m.w1_off(), arch.hidden, arch.input_dim());
    fill(m.w2_off(), arch.hidden, arch.hidden);
    fill(m.head_w_off(SampleOrigin::Task), arch.output_dim(), arch.hidden);
    fill(m.head_w_off(SampleOrigin::Synthesized), arch.output_dim(), arch.hidden);
    // Biases start at zero.
    return m;
}

std::vector<double> PredictorModel::flatten_input(const DemonstrationClip& demo,
                                                  const SceneDescriptor& instance) const {
    if (static_cast<int>(demo.frames.size()) != arch.demo_frames ||
        demo.frame_dim() != arch.frame_dim || instance.dim() != arch.descriptor_dim)
        throw InvalidInput("predict: input dimensions do not match the model");
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(arch.input_dim()));
    for (const auto& f : demo.frames) x.insert(x.end(), f.begin(), f.end());
    x.insert(x.end(), instance.vector.begin(), instance.vector.end());
    return x;
}

namespace {

void affine(const double* w, const double* b, const double* x, int rows, int cols,
            double* out) {
    for (int r = 0; r < rows; ++r) {
        double s = b[r];
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += wr[c] * x[c];
        out[r] = s;
    }
}

std::vector<AttributedWaypoint> unpack_waypoints(const std::vector<double>& out, int k) {
    std::vector<AttributedWaypoint> w(kTotalWaypoints);
    const int dim = 3 + k;
    for (int i = 0; i < kTotalWaypoints; ++i) {
        const double* row = out.data() + static_cast<std::size_t>(i) * dim;
        w[static_cast<std::size_t>(i)].position = {row[0], row[1], row[2]};
        w[static_cast<std::size_t>(i)].attributes.assign(row + 3, row + dim);
    }
    return w;
}

}  // namespace

std::vector<double> PredictorModel::forward(std::vector<double> input, SampleOrigin head,
                                            Cache& cache) const {
    const int in = arch.input_dim(), h = arch.hidden, out_dim = arch.output_dim();
    cache.input = std::move(input);
    cache.a1.assign(static_cast<std::size_t>(h), 0.0);
    cache.a2.assign(static_cast<std::size_t>(h), 0.0);
    affine(params.data() + w1_off(), params.data() + b1_off(), cache.input.data(), h, in,
           cache.a1.data());
    for (auto& v : cache.a1) v = std::tanh(v);
    affine(params.data() + w2_off(), params.data() + b2_off(), cache.a1.data(), h, h,
           cache.a2.data());
    for (auto& v : cache.a2) v = std::tanh(v);
    std::vector<double> out(static_cast<std::size_t>(out_dim));
    affine(params.data() + head_w_off(head), params.data() + head_b_off(head),
           cache.a2.data(), out_dim, h, out.data());
    return out;
}

void PredictorModel::backward(const Cache& cache, SampleOrigin head,
                              const std::vector<double>& dout,
                              std::vector<double>& grad) const {
    const int in = arch.input_dim(), h = arch.hidden, out_dim = arch.output_dim();
    const double* wh = params.data() + head_w_off(head);
    double* gwh = grad.data() + head_w_off(head);
    double* gbh = grad.data() + head_b_off(head);

    std::vector<double> da2(static_cast<std::size_t>(h), 0.0);
    for (int r = 0; r < out_dim; ++r) {
        const double g = dout[static_cast<std::size_t>(r)];
        if (g == 0.0) continue;
        const double* wr = wh + static_cast<std::size_t>(r) * h;
        double* gwr = gwh + static_cast<std::size_t>(r) * h;
        for (int c = 0; c < h; ++c) {
            gwr[c] += g * cache.a2[static_cast<std::size_t>(c)];
            da2[static_cast<std::size_t>(c)] += g * wr[c];
        }
        gbh[r] += g;
    }

    // tanh' = 1 - a^2
    std::vector<double> dz2(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i)
        dz2[static_cast<std::size_t>(i)] =
            da2[static_cast<std::size_t>(i)] *
            (1.0 - cache.a2[static_cast<std::size_t>(i)] * cache.a2[static_cast<std::size_t>(i)]);

    const double* w2 = params.data() + w2_off();
    double* gw2 = grad.data() + w2_off();
    double* gb2 = grad.data() + b2_off();
    std::vector<double> da1(static_cast<std::size_t>(h), 0.0);
    for (int r = 0; r < h; ++r) {
        const double g = dz2[static_cast<std::size_t>(r)];
        if (g == 0.0) continue;
        const double* wr = w2 + static_cast<std::size_t>(r) * h;
        double* gwr = gw2 + static_cast<std::size_t>(r) * h;
        for (int c = 0; c < h; ++c) {
            gwr[c] += g * cache.a1[static_cast<std::size_t>(c)];
            da1[static_cast<std::size_t>(c)] += g * wr[c];
        }
        gb2[r] += g;
    }

    std::vector<double> dz1(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i)
        dz1[static_cast<std::size_t>(i)] =
            da1[static_cast<std::size_t>(i)] *
            (1.0 - cache.a1[static_cast<std::size_t>(i)] * cache.a1[static_cast<std::size_t>(i)]);

    double* gw1 = grad.data() + w1_off();
    double* gb1 = grad.data() + b1_off();
    for (int r = 0; r < h; ++r) {
        const double g = dz1[static_cast<std::size_t>(r)];
        if (g == 0.0) continue;
        double* gwr = gw1 + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c) gwr[c] += g * cache.input[static_cast<std::size_t>(c)];
        gb1[r] += g;
    }
}

WaypointPrediction PredictorModel::predict(const DemonstrationClip& demo,
                                           const SceneDescriptor& instance) const {
    Cache cache;
    WaypointPrediction pred;
    pred.task_head =
        unpack_waypoints(forward(flatten_input(demo, instance), SampleOrigin::Task, cache),
                         arch.k);
    pred.synth_head = unpack_waypoints(
        forward(flatten_input(demo, instance), SampleOrigin::Synthesized, cache), arch.k);
    return pred;
}

void save_model(const PredictorModel& model, const std::filesystem::path& path) {
    json j{{"arch",
            {{"demo_frames", model.arch.demo_frames},
             {"frame_dim", model.arch.frame_dim},
             {"descriptor_dim", model.arch.descriptor_dim},
             {"k", model.arch.k},
             {"hidden", model.arch.hidden}}},
           {"params", model.params}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump() << '\n';
}

PredictorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(1, "malformed model JSON");
    PredictorModel m;
    const auto& a = j.at("arch");
    m.arch.demo_frames = a.at("demo_frames").get<int>();
    m.arch.frame_dim = a.at("frame_dim").get<int>();
    m.arch.descriptor_dim = a.at("descriptor_dim").get<int>();
    m.arch.k = a.at("k").get<int>();
    m.arch.hidden = a.at("hidden").get<int>();
    m.params = j.at("params").get<std::vector<double>>();
    if (m.params.size() != m.param_count())
        throw InvalidInput("model parameter count does not match architecture");
    return m;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidInput("train: learning_rate must be > 0");
    if (batch_size < 1) throw InvalidInput("train: batch_size must be >= 1");
    if (iterations < 1) throw InvalidInput("train: iterations must be >= 1");
    if (samples_per_segment < 1)
        throw InvalidInput("train: samples_per_segment must be >= 1");
    sdtw.validate();
}

TrainResult train(PredictorModel& model, const std::vector<Sample>& dataset,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw InvalidInput("train: empty dataset");

    const std::size_t n_params = model.param_count();
    const int n = static_cast<int>(dataset.size());

    // Flatten every sample's input once.
    std::vector<std::vector<double>> inputs(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        inputs[i] = model.flatten_input(dataset[i].demo, dataset[i].instance_descriptor);

    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    Rng rng(cfg.seed);
    TrainResult result;
    result.loss_curve.reserve(static_cast<std::size_t>(cfg.iterations));

    std::vector<std::vector<double>> sample_grads(static_cast<std::size_t>(cfg.batch_size));
    std::vector<double> sample_losses(static_cast<std::size_t>(cfg.batch_size));
    std::vector<int> batch(static_cast<std::size_t>(cfg.batch_size));
    std::vector<double> grad(n_params);

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        for (int b = 0; b < cfg.batch_size; ++b)
            batch[static_cast<std::size_t>(b)] =
                static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));

        const auto eval_sample = [&](int b) {
            const Sample& s = dataset[static_cast<std::size_t>(batch[static_cast<std::size_t>(b)])];
            auto& g = sample_grads[static_cast<std::size_t>(b)];
            g.assign(n_params, 0.0);
            PredictorModel::Cache cache;
            const std::vector<double> out =
                model.forward(inputs[static_cast<std::size_t>(batch[static_cast<std::size_t>(b)])],
                              s.origin, cache);
            const auto waypoints = unpack_waypoints(out, model.arch.k);
            const MultiresolutionResult loss = multiresolution_loss(
                waypoints, s.target, cfg.sdtw, cfg.samples_per_segment);
            sample_losses[static_cast<std::size_t>(b)] = loss.loss;
            std::vector<double> dout(static_cast<std::size_t>(model.arch.output_dim()));
            const int dim = model.arch.waypoint_dim();
            for (int wpt = 0; wpt < kTotalWaypoints; ++wpt)
                for (int c = 0; c < dim; ++c)
                    dout[static_cast<std::size_t>(wpt * dim + c)] =
                        loss.waypoint_gradient(wpt, c) / cfg.batch_size;
            model.backward(cache, s.origin, dout, g);
        };

        if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic)
            for (int b = 0; b < cfg.batch_size; ++b) eval_sample(b);
        } else {
            for (int b = 0; b < cfg.batch_size; ++b) eval_sample(b);
        }

        // Fixed reduction order keeps runs bit-identical across thread counts.
        std::fill(grad.begin(), grad.end(), 0.0);
        double batch_loss = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            batch_loss += sample_losses[static_cast<std::size_t>(b)] / cfg.batch_size;
            const auto& g = sample_grads[static_cast<std::size_t>(b)];
            for (std::size_t p = 0; p < n_params; ++p) grad[p] += g[p];
        }
        if (!std::isfinite(batch_loss))
            throw ConvergenceError("training diverged at iteration " + std::to_string(iter));
        result.loss_curve.push_back(batch_loss);

        const double t = iter + 1;
        const double corr1 = 1.0 - std::pow(cfg.adam_beta1, t);
        const double corr2 = 1.0 - std::pow(cfg.adam_beta2, t);
        for (std::size_t p = 0; p < n_params; ++p) {
            adam_m[p] = cfg.adam_beta1 * adam_m[p] + (1.0 - cfg.adam_beta1) * grad[p];
            adam_v[p] = cfg.adam_beta2 * adam_v[p] + (1.0 - cfg.adam_beta2) * grad[p] * grad[p];
            const double mh = adam_m[p] / corr1;
            const double vh = adam_v[p] / corr2;
            model.params[p] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_epsilon);
        }
    }

    const std::size_t window = std::max<std::size_t>(1, result.loss_curve.size() / 10);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < window; ++i) head += result.loss_curve[i] / window;
    for (std::size_t i = result.loss_curve.size() - window; i < result.loss_curve.size(); ++i)
        tail += result.loss_curve[i] / window;
    result.loss_decreased = tail < head;
    return result;
}

EvalResult evaluate(const PredictorModel* model, const std::vector<int>& task_ids,
                    const EvalConfig& cfg, const SimConfig& sim_cfg) {
    EvalResult result;
    result.per_task.resize(task_ids.size());

    for (std::size_t ti = 0; ti < task_ids.size(); ++ti) {
        const int task_id = task_ids[ti];
        const PickPlaceTask task = family_task(task_id);
        std::vector<char> outcomes(static_cast<std::size_t>(cfg.episodes_per_task), 0);

        const auto run_episode = [&](int e) {
            Rng rng(cfg.seed, static_cast<std::uint64_t>(task_id) * 1000003 +
                                  static_cast<std::uint64_t>(e));
            // Demonstration on its own instance, retried until the expert
            // succeeds.
            Scene demo_scene;
            ExpertEpisode demo_ep;
            bool demo_ok = false;
            for (int attempt = 0; attempt < cfg.demo_retry_limit; ++attempt) {
                demo_scene = sample_scene(rng, cfg.scene);
                demo_ep = generate_expert_episode(task, demo_scene, sim_cfg, cfg.grasp);
                if (demo_ep.success) {
                    demo_ok = true;
                    break;
                }
            }
            if (!demo_ok) return;  // counted as failure

            const Scene test_scene = sample_scene(rng, cfg.scene);
            std::vector<AttributedWaypoint> waypoints;
            if (model) {
                const auto grasp_bits = mine_grasp_attribute(demo_ep.log, cfg.mining);
                const auto traj = log_to_attributed_trajectory(demo_ep.log, {grasp_bits});
                const auto clip = make_demonstration_clip(scene_to_descriptor(demo_scene),
                                                          traj, SampleOrigin::Task);
                waypoints = model->predict(clip, scene_to_descriptor(test_scene))
                                .execution_waypoints();
            } else {
                waypoints = oracle_predict(test_scene, task);
            }
            const SimState start = make_initial_state(test_scene, sim_cfg);
            const ExecutionResult exec =
                execute_waypoints(start, waypoints, sim_cfg, cfg.grasp);
            outcomes[static_cast<std::size_t>(e)] =
                task_success(task, exec.final_state, sim_cfg) ? 1 : 0;
        };

        if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic)
            for (int e = 0; e < cfg.episodes_per_task; ++e) run_episode(e);
        } else {
            for (int e = 0; e < cfg.episodes_per_task; ++e) run_episode(e);
        }

        TaskEval te;
        te.task_id = task_id;
        te.episodes = cfg.episodes_per_task;
        for (char c : outcomes) te.successes += c;
        te.success_rate = static_cast<double>(te.successes) / cfg.episodes_per_task;
        te.standard_error = std::sqrt(te.success_rate * (1.0 - te.success_rate) /
                                      cfg.episodes_per_task);
        result.per_task[ti] = te;
    }

    for (const auto& te : result.per_task)
        result.mean_success += te.success_rate / static_cast<double>(result.per_task.size());
    return result;
}

}  // namespace awi
