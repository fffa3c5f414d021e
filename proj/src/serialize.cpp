#include "awi/serialize.hpp"

#include <fstream>

#include "awi/errors.hpp"

namespace awi {

namespace {

json vec_to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> doubles_from_json(const json& j) {
    if (!j.is_array()) throw InvalidInput("expected array of numbers");
    return j.get<std::vector<double>>();
}

template <typename T, typename ToJson>
void save_jsonl(const std::vector<T>& items, const std::filesystem::path& path,
                ToJson&& to_j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& item : items) out << to_j(item).dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename FromJson>
auto load_jsonl(const std::filesystem::path& path, FromJson&& from_j)
    -> std::vector<decltype(from_j(json{}))> {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::vector<decltype(from_j(json{}))> items;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno, "malformed JSON record");
        try {
            items.push_back(from_j(j));
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return items;
}

}  // namespace

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidInput("expected 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const AttributedWaypoint& w) {
    return json{{"p", to_json(w.position)}, {"a", vec_to_json(w.attributes)}};
}

AttributedWaypoint waypoint_from_json(const json& j) {
    AttributedWaypoint w;
    w.position = vec3_from_json(j.at("p"));
    w.attributes = doubles_from_json(j.at("a"));
    return w;
}

json to_json(const AttributedTrajectory& t) {
    json pts = json::array();
    for (const auto& p : t.points) pts.push_back(to_json(p));
    json j{{"points", std::move(pts)}};
    if (t.timestamps) j["timestamps"] = vec_to_json(*t.timestamps);
    return j;
}

AttributedTrajectory trajectory_from_json(const json& j) {
    AttributedTrajectory t;
    for (const auto& p : j.at("points")) t.points.push_back(waypoint_from_json(p));
    if (j.contains("timestamps")) t.timestamps = doubles_from_json(j.at("timestamps"));
    t.validate();
    return t;
}

json to_json(const RobotLog& l) {
    json states = json::array();
    for (const auto& s : l.states)
        states.push_back(json{{"q", vec_to_json(s.joint_angles)},
                              {"gap", s.gripper_gap},
                              {"ee", to_json(s.ee_position)}});
    json actions = json::array();
    for (const auto& a : l.actions)
        actions.push_back(json{{"dee", to_json(a.delta_ee)},
                               {"close", a.gripper_close_command}});
    return json{{"states", std::move(states)}, {"actions", std::move(actions)}};
}

RobotLog robot_log_from_json(const json& j) {
    RobotLog l;
    for (const auto& s : j.at("states")) {
        RobotState st;
        st.joint_angles = doubles_from_json(s.at("q"));
        st.gripper_gap = s.at("gap").get<double>();
        st.ee_position = vec3_from_json(s.at("ee"));
        l.states.push_back(std::move(st));
    }
    for (const auto& a : j.at("actions")) {
        RobotAction ac;
        ac.delta_ee = vec3_from_json(a.at("dee"));
        ac.gripper_close_command = a.at("close").get<bool>();
        l.actions.push_back(ac);
    }
    l.validate();
    return l;
}

json to_json(const Scene& s) {
    json objects = json::array();
    for (const auto& o : s.objects)
        objects.push_back(json{{"id", o.id},
                               {"shape", o.shape == ShapeKind::Sphere ? "sphere" : "box"},
                               {"size", o.size},
                               {"pos", to_json(o.position)}});
    json bins = json::array();
    for (const auto& b : s.bins)
        bins.push_back(json{{"id", b.id},
                            {"center", to_json(b.center)},
                            {"extent", to_json(b.extent)}});
    return json{{"objects", std::move(objects)},
                {"bins", std::move(bins)},
                {"arm_base", to_json(s.arm_base)},
                {"workspace", json{{"min", to_json(s.workspace.min)},
                                   {"max", to_json(s.workspace.max)}}}};
}

Scene scene_from_json(const json& j) {
    Scene s;
    for (const auto& o : j.at("objects")) {
        SceneObject obj;
        obj.id = o.at("id").get<int>();
        const std::string shape = o.at("shape").get<std::string>();
        if (shape == "sphere")
            obj.shape = ShapeKind::Sphere;
        else if (shape == "box")
            obj.shape = ShapeKind::Box;
        else
            throw InvalidInput("unknown shape: " + shape);
        obj.size = o.at("size").get<double>();
        obj.position = vec3_from_json(o.at("pos"));
        s.objects.push_back(obj);
    }
    for (const auto& b : j.at("bins")) {
        Bin bin;
        bin.id = b.at("id").get<int>();
        bin.center = vec3_from_json(b.at("center"));
        bin.extent = vec3_from_json(b.at("extent"));
        s.bins.push_back(bin);
    }
    s.arm_base = vec3_from_json(j.at("arm_base"));
    s.workspace.min = vec3_from_json(j.at("workspace").at("min"));
    s.workspace.max = vec3_from_json(j.at("workspace").at("max"));
    s.validate();
    return s;
}

json to_json(const DemonstrationClip& c) {
    json frames = json::array();
    for (const auto& f : c.frames) frames.push_back(vec_to_json(f));
    return json{{"frames", std::move(frames)},
                {"source_trajectory", to_json(c.source_trajectory)},
                {"origin", to_string(c.origin)}};
}

namespace {
SampleOrigin origin_from_string(const std::string& s) {
    if (s == "task") return SampleOrigin::Task;
    if (s == "synthesized") return SampleOrigin::Synthesized;
    throw InvalidInput("unknown origin: " + s);
}
}  // namespace

DemonstrationClip clip_from_json(const json& j) {
    DemonstrationClip c;
    for (const auto& f : j.at("frames")) c.frames.push_back(doubles_from_json(f));
    c.source_trajectory = trajectory_from_json(j.at("source_trajectory"));
    c.origin = origin_from_string(j.at("origin").get<std::string>());
    c.validate();
    return c;
}

json to_json(const Sample& s) {
    return json{{"demo", to_json(s.demo)},
                {"instance", vec_to_json(s.instance_descriptor.vector)},
                {"target", to_json(s.target)},
                {"origin", to_string(s.origin)},
                {"task_id", s.task_id}};
}

Sample sample_from_json(const json& j) {
    Sample s;
    s.demo = clip_from_json(j.at("demo"));
    s.instance_descriptor.vector = doubles_from_json(j.at("instance"));
    s.target = trajectory_from_json(j.at("target"));
    s.origin = origin_from_string(j.at("origin").get<std::string>());
    s.task_id = j.value("task_id", -1);
    s.validate();
    return s;
}

void save_dataset(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    save_jsonl(samples, path, [](const Sample& s) { return to_json(s); });
}

std::vector<Sample> load_dataset(const std::filesystem::path& path) {
    return load_jsonl(path, [](const json& j) { return sample_from_json(j); });
}

void save_trajectories(const std::vector<AttributedTrajectory>& ts,
                       const std::filesystem::path& path) {
    save_jsonl(ts, path, [](const AttributedTrajectory& t) { return to_json(t); });
}

std::vector<AttributedTrajectory> load_trajectories(const std::filesystem::path& path) {
    return load_jsonl(path, [](const json& j) { return trajectory_from_json(j); });
}

void save_robot_logs(const std::vector<RobotLog>& logs, const std::filesystem::path& path) {
    save_jsonl(logs, path, [](const RobotLog& l) { return to_json(l); });
}

std::vector<RobotLog> load_robot_logs(const std::filesystem::path& path) {
    return load_jsonl(path, [](const json& j) { return robot_log_from_json(j); });
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json(scene).dump(2) << '\n';
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError(1, "malformed scene JSON");
    return scene_from_json(j);
}

}  // namespace awi
