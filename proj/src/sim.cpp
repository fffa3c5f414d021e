#include "awi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "awi/errors.hpp"

namespace awi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_limits(const ArmModel& arm, const std::array<double, 3>& q) {
    for (int i = 0; i < 3; ++i)
        if (q[static_cast<std::size_t>(i)] < arm.joint_limits[static_cast<std::size_t>(i)][0] ||
            q[static_cast<std::size_t>(i)] > arm.joint_limits[static_cast<std::size_t>(i)][1])
            throw InvalidInput("joint angle outside limits");
}

}  // namespace

Vec3 forward_kinematics(const ArmModel& arm, const std::array<double, 3>& q) {
    check_limits(arm, q);
    const double l1 = arm.link_lengths[0], l2 = arm.link_lengths[1],
                 l3 = arm.link_lengths[2];
    const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);
    const double c23 = std::cos(q[1] + q[2]), s23 = std::sin(q[1] + q[2]);
    const double r = l1 + l2 * c2 + l3 * c23;
    const double h = l2 * s2 + l3 * s23;
    const double cy = std::cos(q[0]), sy = std::sin(q[0]);
    return {r * cy, r * sy, h};
}

std::array<Vec3, 3> arm_jacobian(const ArmModel& arm, const std::array<double, 3>& q) {
    const double l2 = arm.link_lengths[1], l3 = arm.link_lengths[2];
    const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);
    const double c23 = std::cos(q[1] + q[2]), s23 = std::sin(q[1] + q[2]);
    const double r = arm.link_lengths[0] + l2 * c2 + l3 * c23;
    const double cy = std::cos(q[0]), sy = std::sin(q[0]);
    const double dr2 = -l2 * s2 - l3 * s23;  // dr/dq1
    const double dh2 = l2 * c2 + l3 * c23;   // dh/dq1
    const double dr3 = -l3 * s23;            // dr/dq2
    const double dh3 = l3 * c23;             // dh/dq2
    return {Vec3{-r * sy, r * cy, 0.0}, Vec3{dr2 * cy, dr2 * sy, dh2},
            Vec3{dr3 * cy, dr3 * sy, dh3}};
}

namespace {

// Solve (J J^T + lambda^2 I) y = e for the 3x3 system, then dq = J^T y.
std::array<double, 3> dls_step(const std::array<Vec3, 3>& jac, const Vec3& err,
                               double lambda) {
    double a[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += jac[static_cast<std::size_t>(k)][r] * jac[static_cast<std::size_t>(k)][c];
            a[r][c] = s + (r == c ? lambda * lambda : 0.0);
        }
    // Cramer's rule; the damping keeps the determinant well away from zero.
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    const Vec3 b = err;
    const double y0 = (b.x * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (b.y * a[2][2] - a[1][2] * b.z) +
                       a[0][2] * (b.y * a[2][1] - a[1][1] * b.z)) /
                      det;
    const double y1 = (a[0][0] * (b.y * a[2][2] - a[1][2] * b.z) -
                       b.x * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * b.z - b.y * a[2][0])) /
                      det;
    const double y2 = (a[0][0] * (a[1][1] * b.z - b.y * a[2][1]) -
                       a[0][1] * (a[1][0] * b.z - b.y * a[2][0]) +
                       b.x * (a[1][0] * a[2][1] - a[1][1] * a[2][0])) /
                      det;
    const Vec3 y{y0, y1, y2};
    std::array<double, 3> dq{};
    for (int j = 0; j < 3; ++j) dq[static_cast<std::size_t>(j)] = jac[static_cast<std::size_t>(j)].dot(y);
    return dq;
}

std::array<double, 3> run_dls(const ArmModel& arm, const Vec3& target_local,
                              std::array<double, 3> q, const IkConfig& ik,
                              double* final_error) {
    for (int it = 0; it < ik.max_iterations; ++it) {
        const Vec3 e = target_local - forward_kinematics(arm, q);
        if (final_error) *final_error = e.norm();
        if (e.norm() < ik.tolerance) return q;
        const auto jac = arm_jacobian(arm, q);
        auto dq = dls_step(jac, e, ik.damping);
        for (int j = 0; j < 3; ++j) {
            dq[static_cast<std::size_t>(j)] =
                std::clamp(dq[static_cast<std::size_t>(j)], -ik.step_clamp, ik.step_clamp);
            q[static_cast<std::size_t>(j)] =
                std::clamp(q[static_cast<std::size_t>(j)] + dq[static_cast<std::size_t>(j)],
                           arm.joint_limits[static_cast<std::size_t>(j)][0],
                           arm.joint_limits[static_cast<std::size_t>(j)][1]);
        }
    }
    if (final_error) *final_error = (target_local - forward_kinematics(arm, q)).norm();
    return q;
}

// Distance by which the best possible pose misses the target; <= 0 means
// geometrically reachable.
double reach_deficit(const ArmModel& arm, const Vec3& target_local) {
    const double rho = std::hypot(target_local.x, target_local.y);
    const double planar = std::hypot(rho - arm.link_lengths[0], target_local.z);
    return planar - arm.reach();
}

// Closed-form 2R solution used to seed the DLS iteration on cold starts.
// Joint limits leave at most one elbow branch feasible for most targets; the
// feasible branch closest to `near` wins ties.
std::array<double, 3> analytic_seed(const ArmModel& arm, const Vec3& target,
                                    const std::array<double, 3>& near) {
    const double l1 = arm.link_lengths[0], l2 = arm.link_lengths[1],
                 l3 = arm.link_lengths[2];
    const double rho = std::hypot(target.x, target.y);
    const double yaw = rho > 1e-9 ? std::atan2(target.y, target.x) : near[0];
    const double d = rho - l1, z = target.z;
    const double cos_elbow =
        std::clamp((d * d + z * z - l2 * l2 - l3 * l3) / (2.0 * l2 * l3), -1.0, 1.0);
    const double bend = std::acos(cos_elbow);

    std::array<double, 3> best = near;
    double best_penalty = kInf;
    for (const double q3 : {bend, -bend}) {
        const double q2 =
            std::atan2(z, d) - std::atan2(l3 * std::sin(q3), l2 + l3 * std::cos(q3));
        std::array<double, 3> q{yaw, q2, q3};
        double penalty = 0.0;  // limit violation first, then distance to `near`
        for (int j = 0; j < 3; ++j) {
            const auto& lim = arm.joint_limits[static_cast<std::size_t>(j)];
            const double clamped = std::clamp(q[static_cast<std::size_t>(j)], lim[0], lim[1]);
            penalty += 1e6 * std::abs(q[static_cast<std::size_t>(j)] - clamped);
            q[static_cast<std::size_t>(j)] = clamped;
            penalty += std::abs(q[static_cast<std::size_t>(j)] - near[static_cast<std::size_t>(j)]);
        }
        if (penalty < best_penalty) {
            best_penalty = penalty;
            best = q;
        }
    }
    return best;
}

}  // namespace

std::array<double, 3> inverse_kinematics(const ArmModel& arm, const Vec3& target,
                                         const std::array<double, 3>& initial_angles,
                                         const IkConfig& ik) {
    const double deficit = reach_deficit(arm, target);
    if (deficit > 0.0)
        throw UnreachableError("IK target outside reachable set by " +
                                   std::to_string(deficit) + " m",
                               deficit);
    double err = kInf;
    auto q = run_dls(arm, target, initial_angles, ik, &err);
    if (err >= ik.tolerance) {
        // The warm start walked into a joint limit on the wrong elbow branch;
        // reseed from the closed-form solution and iterate again.
        double err2 = kInf;
        const auto q2 =
            run_dls(arm, target, analytic_seed(arm, target, initial_angles), ik, &err2);
        if (err2 < err) {
            q = q2;
            err = err2;
        }
    }
    if (err >= ik.tolerance)
        throw ConvergenceError("IK did not converge: residual " + std::to_string(err) + " m");
    return q;
}

std::array<double, 3> ik_best_effort(const ArmModel& arm, const Vec3& target,
                                     const std::array<double, 3>& initial_angles,
                                     const IkConfig& ik) {
    double err = kInf;
    auto q = run_dls(arm, target, initial_angles, ik, &err);
    if (err >= ik.tolerance) {
        double err2 = kInf;
        const auto q2 =
            run_dls(arm, target, analytic_seed(arm, target, initial_angles), ik, &err2);
        if (err2 < err) {
            q = q2;
            err = err2;
        }
    }
    return q;
}

bool reachable(const ArmModel& arm, const Vec3& target_local, double margin) {
    return reach_deficit(arm, target_local) <= -margin;
}

SimState make_initial_state(const Scene& scene, const SimConfig& cfg) {
    scene.validate();
    SimState s;
    s.scene = scene;
    s.gripper_gap = cfg.gripper.gap_max;
    const Vec3 center = scene.workspace.center();
    const Vec3 home = {center.x, center.y,
                       0.5 * (center.z + scene.workspace.max.z)};
    s.joint_angles = ik_best_effort(cfg.arm, home - scene.arm_base,
                                    {0.0, 0.5, -1.0}, cfg.ik);
    return s;
}

Vec3 ee_position(const SimState& state, const SimConfig& cfg) {
    return state.scene.arm_base + forward_kinematics(cfg.arm, state.joint_angles);
}

SimState step(const SimState& state, const SimAction& action, const SimConfig& cfg) {
    SimState next = state;

    // EE motion: clip the commanded delta, clamp the target into the
    // workspace, then drive the joints.
    Vec3 delta = action.delta_ee;
    const double dn = delta.norm();
    if (dn > cfg.arm.max_ee_step) delta = delta * (cfg.arm.max_ee_step / dn);
    const Vec3 ee_old = ee_position(state, cfg);
    const Vec3 ee_target = state.scene.workspace.clamp(ee_old + delta);
    if ((ee_target - ee_old).norm() > 0.0) {
        // Control steps track the commanded point much tighter than the
        // public IK tolerance so straight-line paths stay straight.
        IkConfig tight = cfg.ik;
        tight.tolerance = std::min(cfg.ik.tolerance, 1e-9);
        next.joint_angles = ik_best_effort(cfg.arm, ee_target - state.scene.arm_base,
                                           state.joint_angles, tight);
    }
    const Vec3 ee_new = ee_position(next, cfg);

    // Gripper slew toward the commanded closure.
    const double closure = std::clamp(action.gripper_closure, 0.0, 1.0);
    const double desired_gap = (1.0 - closure) * cfg.gripper.gap_max;
    double gap = next.gripper_gap;
    if (desired_gap > gap)
        gap = std::min(desired_gap, gap + cfg.gripper.slew_rate);
    else
        gap = std::max(desired_gap, gap - cfg.gripper.slew_rate);

    if (next.attached_object) {
        SceneObject* held = nullptr;
        for (auto& o : next.scene.objects)
            if (o.id == *next.attached_object) held = &o;
        if (gap > held->size) {
            // Jaws opened wider than the object: detach and drop to rest.
            next.truth_attach_events.push_back({state.step_count, false, held->id});
            held->position.z = held->half_height();
            next.attached_object.reset();
        } else {
            gap = held->size * cfg.gripper.squeeze;
            held->position = ee_new + next.grab_offset;
        }
    } else if (gap < next.gripper_gap) {
        // Closing: attach the nearest graspable object, if any.
        SceneObject* best = nullptr;
        double best_dist = kInf;
        for (auto& o : next.scene.objects) {
            const double hd = horizontal_distance(ee_new, o.position);
            const double dz = ee_new.z - o.top().z;
            if (hd <= cfg.gripper.grasp_radius && dz >= -cfg.gripper.vertical_slack &&
                dz <= cfg.gripper.finger_length && hd < best_dist) {
                best = &o;
                best_dist = hd;
            }
        }
        if (best && gap < best->size) {
            next.truth_attach_events.push_back({state.step_count, true, best->id});
            next.attached_object = best->id;
            next.grab_offset = best->position - ee_new;
            gap = best->size * cfg.gripper.squeeze;
        }
    }
    next.gripper_gap = gap;
    next.step_count = state.step_count + 1;
    return next;
}

std::vector<bool> attachment_labels(const std::vector<AttachEvent>& events, int length) {
    std::vector<bool> labels(static_cast<std::size_t>(length), false);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!events[i].attach) continue;
        const int start = events[i].step;
        int end = length;  // still held at the last frame unless detached
        for (std::size_t j = i + 1; j < events.size(); ++j) {
            if (!events[j].attach && events[j].object_id == events[i].object_id) {
                end = events[j].step;
                break;
            }
        }
        for (int t = start; t < end && t < length; ++t)
            labels[static_cast<std::size_t>(t)] = true;
    }
    return labels;
}

namespace {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length, world frame
};

double intersect_ground(const Ray& ray) {
    if (ray.dir.z >= 0.0) return kInf;
    const double t = -ray.origin.z / ray.dir.z;
    return t > 0.0 ? t : kInf;
}

double intersect_sphere(const Ray& ray, const Vec3& center, double radius) {
    const Vec3 oc = ray.origin - center;
    const double b = oc.dot(ray.dir);
    const double c = oc.norm2() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return kInf;
    const double s = std::sqrt(disc);
    const double t0 = -b - s;
    if (t0 > 0.0) return t0;
    const double t1 = -b + s;
    return t1 > 0.0 ? t1 : kInf;
}

double intersect_box(const Ray& ray, const Vec3& center, double edge) {
    const double h = edge * 0.5;
    double tmin = 0.0, tmax = kInf;
    for (int a = 0; a < 3; ++a) {
        const double lo = center[a] - h, hi = center[a] + h;
        const double o = ray.origin[a], d = ray.dir[a];
        if (std::abs(d) < 1e-15) {
            if (o < lo || o > hi) return kInf;
            continue;
        }
        double t0 = (lo - o) / d, t1 = (hi - o) / d;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return kInf;
    }
    return tmin > 0.0 ? tmin : (tmax > 0.0 ? tmax : kInf);
}

double cast_depth(const Scene& scene, const Vec3& cam_pos, const Mat3& rot, double xn,
                  double yn) {
    const Vec3 dir_cam = Vec3{xn, yn, 1.0}.normalized();
    const Ray ray{cam_pos, rot * dir_cam};
    double t_hit = intersect_ground(ray);
    for (const auto& o : scene.objects) {
        const double t = o.shape == ShapeKind::Sphere
                             ? intersect_sphere(ray, o.position, o.size * 0.5)
                             : intersect_box(ray, o.position, o.size);
        t_hit = std::min(t_hit, t);
    }
    if (t_hit == kInf) return kInf;
    return t_hit * dir_cam.z;  // z-depth in the camera frame
}

DepthImage render_impl(const SimState& state, const SimConfig& cfg, bool parallel) {
    const auto& cam = cfg.camera;
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.fx = cam.fx;
    img.fy = cam.fy;
    img.cx = cam.cx;
    img.cy = cam.cy;
    img.camera_position = ee_position(state, cfg) + Vec3{0, 0, cam.mount_height};
    // Down-looking camera: +z points at the floor, image x tracks world +x.
    img.camera_rotation = Mat3::from_columns({1, 0, 0}, {0, -1, 0}, {0, 0, -1});
    img.depths.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0);

    const auto render_row = [&](int v) {
        for (int u = 0; u < cam.width; ++u) {
            const double xn = (u - cam.cx) / cam.fx;
            const double yn = (v - cam.cy) / cam.fy;
            img.depths[static_cast<std::size_t>(v) * cam.width + u] =
                cast_depth(state.scene, img.camera_position, img.camera_rotation, xn, yn);
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int v = 0; v < cam.height; ++v) render_row(v);
    } else {
        for (int v = 0; v < cam.height; ++v) render_row(v);
    }
    return img;
}

}  // namespace

DepthImage render_depth_serial(const SimState& state, const SimConfig& cfg) {
    return render_impl(state, cfg, false);
}

DepthImage render_depth(const SimState& state, const SimConfig& cfg) {
    return render_impl(state, cfg, true);
}

void save_depth_pgm(const DepthImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << image.width << " " << image.height << "\n65535\n";
    for (double d : image.depths) {
        const double mm = std::isfinite(d) ? d * 1000.0 : 65535.0;
        const auto v = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
        const unsigned char hi = static_cast<unsigned char>(v >> 8);
        const unsigned char lo = static_cast<unsigned char>(v & 0xff);
        out.put(static_cast<char>(hi));
        out.put(static_cast<char>(lo));
    }
}

}  // namespace awi
