#include <doctest.h>

#include "awi/errors.hpp"
#include "awi/mining.hpp"
#include "awi/task.hpp"
#include "helpers.hpp"

using namespace awi;
using namespace awi::testutil;

namespace {

// Log with a close command at frame `close_at` and a jaw-gap drop of
// `gap_drop` visible d frames later.
RobotLog gap_log(int length, int close_at, int close_until, double gap_before,
                 double gap_after, int gap_change_at) {
    RobotLog log;
    for (int t = 0; t < length; ++t) {
        RobotState s;
        s.joint_angles = {0, 0, 0};
        s.gripper_gap = t < gap_change_at ? gap_before : gap_after;
        s.ee_position = {0.3, 0.0, 0.2};
        log.states.push_back(s);
        RobotAction a;
        a.gripper_close_command = t >= close_at && t < close_until;
        log.actions.push_back(a);
    }
    return log;
}

}  // namespace

TEST_CASE("grasp mining follows the jaw-gap rule") {
    MiningConfig cfg;
    cfg.d = 10;
    cfg.delta = -0.05;
    cfg.smooth_width = 1;  // no smoothing: test the raw formula

    SUBCASE("jaws blocked -> grasp") {
        // gap 0.08 -> 0.06 between frames 5 and 15: change -0.02 > -0.05
        const auto log = gap_log(30, 5, 30, 0.08, 0.06, 6);
        const auto g = mine_grasp_attribute(log, cfg);
        CHECK(g[5] == true);
    }
    SUBCASE("jaws fully closed -> no grasp") {
        // gap 0.08 -> 0.01: change -0.07 < -0.05
        const auto log = gap_log(30, 5, 30, 0.08, 0.01, 6);
        const auto g = mine_grasp_attribute(log, cfg);
        CHECK(g[5] == false);
    }
    SUBCASE("no close command -> no grasp regardless of gaps") {
        const auto log = gap_log(30, 30, 30, 0.08, 0.06, 6);
        const auto g = mine_grasp_attribute(log, cfg);
        for (bool b : g) CHECK(b == false);
    }
}

TEST_CASE("grasp mining clamps the lookahead at the log end") {
    MiningConfig cfg;
    cfg.d = 10;
    cfg.smooth_width = 1;
    // Close from frame 25 of 30 with the object held (gap constant at 0.04):
    // t+d runs past the end and must clamp to the final frame.
    const auto log = gap_log(30, 25, 30, 0.04, 0.04, 0);
    const auto g = mine_grasp_attribute(log, cfg);
    for (int t = 25; t < 30; ++t) CHECK(g[static_cast<std::size_t>(t)] == true);
}

TEST_CASE("press mining detects blocked motion commands") {
    MiningConfig cfg;
    cfg.smooth_width = 1;

    RobotLog log;
    for (int t = 0; t < 20; ++t) {
        RobotState s;
        s.joint_angles = {0, 0, 0};
        s.gripper_gap = 0.08;
        s.ee_position = {0.3, 0.0, 0.2};  // stationary
        log.states.push_back(s);
        RobotAction a;
        a.delta_ee = (t >= 5 && t < 10) ? Vec3{0.02, 0, 0} : Vec3{0, 0, 0};
        log.actions.push_back(a);
    }

    SUBCASE("commanded motion, stationary EE -> press") {
        const auto p = mine_press_attribute(log, cfg);
        for (int t = 5; t < 10; ++t) CHECK(p[static_cast<std::size_t>(t)] == true);
        CHECK(p[0] == false);
        CHECK(p[15] == false);
    }
    SUBCASE("EE moves at the commanded rate -> no press") {
        RobotLog moving = log;
        for (int t = 0; t < 20; ++t)
            moving.states[static_cast<std::size_t>(t)].ee_position.x =
                0.3 + 0.02 * std::max(0, std::min(t, 10) - 5);
        const auto p = mine_press_attribute(moving, cfg);
        for (int t = 5; t < 8; ++t) CHECK(p[static_cast<std::size_t>(t)] == false);
    }
    SUBCASE("zero commanded motion -> no press") {
        RobotLog idle = log;
        for (auto& a : idle.actions) a.delta_ee = {0, 0, 0};
        const auto p = mine_press_attribute(idle, cfg);
        for (bool b : p) CHECK(b == false);
    }
}

TEST_CASE("log_to_attributed_trajectory assembles channels") {
    RobotLog log = gap_log(3, 3, 3, 0.08, 0.08, 0);
    SUBCASE("all-false attributes stay zero") {
        const auto t = log_to_attributed_trajectory(log, {std::vector<bool>(3, false)});
        REQUIRE(t.length() == 3);
        for (const auto& p : t.points) CHECK(p.attributes[0] == 0.0);
    }
    SUBCASE("single true lands on its frame") {
        const auto t =
            log_to_attributed_trajectory(log, {std::vector<bool>{false, true, false}});
        CHECK(t.points[0].attributes[0] == 0.0);
        CHECK(t.points[1].attributes[0] == 1.0);
        CHECK(t.points[2].attributes[0] == 0.0);
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(log_to_attributed_trajectory(log, {std::vector<bool>(2, false)}),
                        InvalidInput);
    }
}

TEST_CASE("mining is translation invariant") {
    Rng rng(19);
    MiningConfig cfg;
    RobotLog log;
    for (int t = 0; t < 40; ++t) {
        RobotState s;
        s.joint_angles = {0, 0, 0};
        s.gripper_gap = t < 20 ? 0.08 : 0.04;
        s.ee_position = {rng.uniform(0, 0.5), rng.uniform(-0.2, 0.2), rng.uniform(0, 0.3)};
        log.states.push_back(s);
        RobotAction a;
        a.gripper_close_command = t >= 18;
        a.delta_ee = {rng.uniform(-0.01, 0.01), 0, 0};
        log.actions.push_back(a);
    }
    const auto g1 = mine_grasp_attribute(log, cfg);
    const auto p1 = mine_press_attribute(log, cfg);
    RobotLog shifted = log;
    for (auto& s : shifted.states) s.ee_position += Vec3{1.0, -2.0, 0.5};
    CHECK(mine_grasp_attribute(shifted, cfg) == g1);
    CHECK(mine_press_attribute(shifted, cfg) == p1);
}

TEST_CASE("smoothing is idempotent on blocky sequences") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        // Random blocky sequence with runs >= width.
        const int width = 5;
        std::vector<bool> seq;
        bool value = rng.bernoulli(0.5);
        while (seq.size() < 60) {
            const int run = width + static_cast<int>(rng.uniform_index(10));
            for (int i = 0; i < run; ++i) seq.push_back(value);
            value = !value;
        }
        const auto once = smooth_boolean_sequence(seq, width, 0.5);
        CHECK(once == seq);
        CHECK(smooth_boolean_sequence(once, width, 0.5) == once);
    }
}

TEST_CASE("smoothing removes isolated glitches") {
    std::vector<bool> seq(21, false);
    seq[10] = true;  // single-frame glitch
    const auto smoothed = smooth_boolean_sequence(seq, 5, 0.5);
    for (bool b : smoothed) CHECK(b == false);
}

TEST_CASE("mined grasp labels match simulator ground truth on expert episodes") {
    const SimConfig sim_cfg;
    const MiningConfig mining_cfg;
    Rng rng(3001);
    int checked_frames = 0;
    for (int episode = 0; episode < 5; ++episode) {
        const Scene scene = sample_scene(rng);
        const PickPlaceTask task{static_cast<int>(rng.uniform_index(4)),
                                 static_cast<int>(rng.uniform_index(4))};
        const ExpertEpisode ep = generate_expert_episode(task, scene, sim_cfg);
        REQUIRE(ep.success);
        const auto mined = mine_grasp_attribute(ep.log, mining_cfg);
        const auto truth =
            attachment_labels(ep.final_state.truth_attach_events, ep.log.length());
        REQUIRE(mined.size() == truth.size());
        for (std::size_t t = 0; t < mined.size(); ++t) {
            CHECK(mined[t] == truth[t]);
            ++checked_frames;
        }
    }
    CHECK(checked_frames > 100);
}
