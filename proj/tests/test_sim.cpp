#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "awi/errors.hpp"
#include "awi/sim.hpp"
#include "awi/task.hpp"
#include "helpers.hpp"

using namespace awi;
using namespace awi::testutil;

namespace {

Scene one_sphere_scene(double x = 0.3, double y = 0.0, double size = 0.04) {
    Scene s;
    s.objects.push_back({0, ShapeKind::Sphere, size, {x, y, size / 2}});
    return s;
}

}  // namespace

TEST_CASE("forward kinematics: zero pose points along +x") {
    const ArmModel arm;
    const Vec3 ee = forward_kinematics(arm, {0, 0, 0});
    CHECK(ee.x == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(ee.y == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ee.z == doctest::Approx(0.0).epsilon(1e-15));

    // With the base applied, the EE sits at base height.
    Scene scene;
    SimConfig cfg;
    SimState st;
    st.scene = scene;
    st.joint_angles = {0, 0, 0};
    const Vec3 world = ee_position(st, cfg);
    CHECK(world.z == doctest::Approx(scene.arm_base.z).epsilon(1e-15));
    CHECK(world.x == doctest::Approx(scene.arm_base.x + 0.7).epsilon(1e-15));
}

TEST_CASE("forward kinematics: base yaw rotates the whole chain") {
    const ArmModel arm;
    const Vec3 ee = forward_kinematics(arm, {M_PI / 2, 0, 0});
    CHECK(ee.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ee.y == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(ee.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward kinematics matches transform composition") {
    const ArmModel arm;
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const std::array<double, 3> q{rng.uniform(-3.0, 3.0), rng.uniform(-1.6, 1.6),
                                      rng.uniform(-2.8, 2.8)};
        // Independent oracle: compose the three rotations explicitly.
        const Mat3 yaw = Mat3::rot_z(q[0]);
        const Mat3 p1 = Mat3::rot_y(-q[1]);
        const Mat3 p2 = Mat3::rot_y(-q[2]);
        const Vec3 x{1, 0, 0};
        const Vec3 oracle = yaw * (x * arm.link_lengths[0]) +
                            (yaw * p1) * (x * arm.link_lengths[1]) +
                            ((yaw * p1) * p2) * (x * arm.link_lengths[2]);
        const Vec3 got = forward_kinematics(arm, q);
        CHECK(distance(got, oracle) < 1e-12);
    }
}

TEST_CASE("forward kinematics rejects out-of-limit angles") {
    const ArmModel arm;
    CHECK_THROWS_AS(forward_kinematics(arm, {3.2, 0, 0}), InvalidInput);
}

TEST_CASE("inverse kinematics: fixed point returns immediately") {
    const ArmModel arm;
    const std::array<double, 3> q0{0.3, 0.4, -0.9};
    const Vec3 target = forward_kinematics(arm, q0);
    const auto q = inverse_kinematics(arm, target, q0);
    CHECK(q == q0);
}

TEST_CASE("inverse kinematics: round trip over random reachable targets") {
    const ArmModel arm;
    const IkConfig ik;
    Rng rng(62);
    int tested = 0;
    while (tested < 100) {
        // Sample inside the workspace shifted to base frame (base at z=0.2).
        const Vec3 target{rng.uniform(0.1, 0.6), rng.uniform(-0.3, 0.3),
                          rng.uniform(-0.2, 0.2)};
        if (!reachable(arm, target, 0.005)) continue;
        ++tested;
        const auto q = inverse_kinematics(arm, target, {0.0, 0.5, -1.0}, ik);
        CHECK(distance(forward_kinematics(arm, q), target) < 1e-3);
    }
}

TEST_CASE("inverse kinematics: unreachable target raises with the deficit") {
    const ArmModel arm;
    const Vec3 target{1.05, 0, 0};  // 1.5x the 0.7 m maximum extent
    try {
        inverse_kinematics(arm, target, {0, 0.5, -1.0});
        FAIL("expected UnreachableError");
    } catch (const UnreachableError& e) {
        CHECK(e.closest_distance > 0.0);
        CHECK(e.closest_distance ==
              doctest::Approx(std::hypot(1.05 - 0.1, 0.2 * 0) - 0.6).epsilon(1e-6));
    }
}

TEST_CASE("step: zero action only advances the step counter") {
    const SimConfig cfg;
    const SimState s0 = make_initial_state(one_sphere_scene(), cfg);
    const SimState s1 = step(s0, {{0, 0, 0}, 0.0}, cfg);
    CHECK(s1.joint_angles == s0.joint_angles);
    CHECK(s1.gripper_gap == s0.gripper_gap);
    CHECK(s1.scene == s0.scene);
    CHECK(!s1.attached_object);
    CHECK(s1.step_count == s0.step_count + 1);
}

TEST_CASE("step: closing far from any object does not attach") {
    const SimConfig cfg;
    // Object at 0.3/0.0; park the EE half a meter away (workspace-clamped).
    Scene scene = one_sphere_scene(0.15, -0.25);
    SimState s = make_initial_state(scene, cfg);
    const Vec3 ee = ee_position(s, cfg);
    CHECK(horizontal_distance(ee, scene.objects[0].position) > 0.2);
    const SimState closed = step(s, {{0, 0, 0}, 1.0}, cfg);
    CHECK(!closed.attached_object);
    CHECK(closed.gripper_gap == doctest::Approx(0.0));
    CHECK(closed.truth_attach_events.empty());
}

TEST_CASE("step: scripted descend-close-lift attaches and raises the object") {
    const SimConfig cfg;
    Scene scene = one_sphere_scene(0.3, 0.0, 0.04);
    SimState s = make_initial_state(scene, cfg);

    const Vec3 above{0.3, 0.0, 0.12};
    for (int i = 0; i < 200; ++i) {
        const Vec3 to_go = above - ee_position(s, cfg);
        if (to_go.norm() < 0.002) break;
        s = step(s, {to_go, 0.0}, cfg);
    }
    const Vec3 grasp_point{0.3, 0.0, 0.07};  // 3 cm above the sphere top
    for (int i = 0; i < 100; ++i) {
        const Vec3 to_go = grasp_point - ee_position(s, cfg);
        if (to_go.norm() < 0.002) break;
        s = step(s, {to_go, 0.0}, cfg);
    }
    s = step(s, {{0, 0, 0}, 1.0}, cfg);
    REQUIRE(s.attached_object.has_value());
    CHECK(*s.attached_object == 0);
    REQUIRE(s.truth_attach_events.size() == 1);
    CHECK(s.truth_attach_events[0].attach);
    CHECK(s.gripper_gap < scene.objects[0].size);

    const double z_before = s.scene.objects[0].position.z;
    for (int i = 0; i < 10; ++i) s = step(s, {{0, 0, 0.02}, 1.0}, cfg);
    CHECK(s.scene.objects[0].position.z > z_before + 0.1);

    // Open: detaches and the object drops to rest.
    s = step(s, {{0, 0, 0}, 0.0}, cfg);
    CHECK(!s.attached_object);
    REQUIRE(s.truth_attach_events.size() == 2);
    CHECK(!s.truth_attach_events[1].attach);
    CHECK(s.scene.objects[0].position.z ==
          doctest::Approx(s.scene.objects[0].half_height()).epsilon(1e-12));
}

TEST_CASE("attachment events alternate and labels cover the carry interval") {
    std::vector<AttachEvent> events{{5, true, 0}, {12, false, 0}, {20, true, 0}};
    const auto labels = attachment_labels(events, 25);
    for (int t = 0; t < 25; ++t) {
        const bool expect = (t >= 5 && t < 12) || t >= 20;
        CHECK(labels[static_cast<std::size_t>(t)] == expect);
    }
}

TEST_CASE("render: empty scene has exact plane depth at the center pixel") {
    SimConfig cfg;
    Scene scene;
    SimState s;
    s.scene = scene;
    // Put the camera at z = 0.5 exactly: EE at 0.45 + 0.05 mount.
    s.joint_angles = ik_best_effort(cfg.arm, Vec3{0.3, 0, 0.45} - scene.arm_base,
                                    {0.0, 0.5, -1.0}, {.tolerance = 1e-12});
    const DepthImage img = render_depth_serial(s, cfg);
    const double center = img.at(32, 32);
    CHECK(center == doctest::Approx(0.5).epsilon(1e-9));
    // Every pixel of a plane render carries the same z-depth.
    for (double d : img.depths) CHECK(d == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("render: sphere top depth under the camera") {
    SimConfig cfg;
    Scene scene = one_sphere_scene(0.3, 0.0, 0.04);  // top at z = 0.04
    SimState s;
    s.scene = scene;
    s.joint_angles = ik_best_effort(cfg.arm, Vec3{0.3, 0, 0.49} - scene.arm_base,
                                    {0.0, 0.5, -1.0}, {.tolerance = 1e-12});
    const DepthImage img = render_depth_serial(s, cfg);  // camera at 0.54
    CHECK(img.at(32, 32) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("render: silhouette pixel count matches the projected disk") {
    SimConfig cfg;
    const double radius = 0.05;
    Scene scene;
    scene.objects.push_back({0, ShapeKind::Sphere, 2 * radius, {0.3, 0.0, radius}});
    SimState s;
    s.scene = scene;
    // Camera 0.25 m above the sphere center.
    const double cam_z = radius + 0.25;
    s.joint_angles =
        ik_best_effort(cfg.arm, Vec3{0.3, 0, cam_z - cfg.camera.mount_height} - scene.arm_base,
                       {0.0, 0.5, -1.0}, {.tolerance = 1e-12});
    const DepthImage img = render_depth_serial(s, cfg);

    int count = 0;
    const double ground = 0.25 + radius;
    for (double d : img.depths)
        if (ground - d > 0.01) ++count;
    const double rho = cfg.camera.fx * radius / std::sqrt(0.25 * 0.25 - radius * radius);
    const double disk = M_PI * rho * rho;
    CHECK(std::abs(count - disk) <= 0.1 * disk);
}

TEST_CASE("render: nearer object wins per pixel") {
    SimConfig cfg;
    Scene scene;
    scene.objects.push_back({0, ShapeKind::Sphere, 0.04, {0.3, 0.0, 0.02}});
    scene.objects.push_back({1, ShapeKind::Sphere, 0.04, {0.3, 0.0, 0.10}});  // stacked above
    SimState s;
    s.scene = scene;
    s.joint_angles = ik_best_effort(cfg.arm, Vec3{0.3, 0, 0.45} - scene.arm_base,
                                    {0.0, 0.5, -1.0}, {.tolerance = 1e-12});
    const DepthImage img = render_depth_serial(s, cfg);
    // Center pixel sees the upper sphere's top (z = 0.12), not the lower one.
    CHECK(img.at(32, 32) == doctest::Approx(0.5 - 0.12).epsilon(1e-6));
}

TEST_CASE("render: box intersection and depth positivity") {
    SimConfig cfg;
    Scene scene;
    scene.objects.push_back({0, ShapeKind::Box, 0.05, {0.3, 0.0, 0.025}});
    SimState s;
    s.scene = scene;
    s.joint_angles = ik_best_effort(cfg.arm, Vec3{0.3, 0, 0.45} - scene.arm_base,
                                    {0.0, 0.5, -1.0}, {.tolerance = 1e-12});
    const DepthImage img = render_depth_serial(s, cfg);
    CHECK(img.at(32, 32) == doctest::Approx(0.5 - 0.05).epsilon(1e-6));
    for (double d : img.depths) CHECK(d > 0.0);
}

TEST_CASE("render: deterministic and PGM dump well-formed") {
    SimConfig cfg;
    Rng rng(63);
    const Scene scene = sample_scene(rng);
    const SimState s = make_initial_state(scene, cfg);
    const DepthImage a = render_depth_serial(s, cfg);
    const DepthImage b = render_depth_serial(s, cfg);
    CHECK(a.depths == b.depths);

    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "awi_test_depth.pgm";
    save_depth_pgm(a, path);
    CHECK(fs::file_size(path) > static_cast<std::size_t>(a.width * a.height * 2));
    fs::remove(path);
}

TEST_CASE("energy-free kinematics across random action/no-action sequences") {
    const SimConfig cfg;
    Rng rng(64);
    SimState s = make_initial_state(one_sphere_scene(), cfg);
    for (int i = 0; i < 50; ++i) {
        s = step(s, {{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                      rng.uniform(-0.02, 0.02)},
                     0.0},
                 cfg);
        const SimState frozen = step(s, {{0, 0, 0}, 0.0}, cfg);
        CHECK(frozen.joint_angles == s.joint_angles);
        CHECK(frozen.scene == s.scene);
        CHECK(frozen.gripper_gap == s.gripper_gap);
    }
}
