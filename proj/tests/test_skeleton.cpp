#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pedgnn/rng.hpp"
#include "pedgnn/skeleton.hpp"

#include <cmath>
#include <queue>

using namespace pedgnn;

namespace {

RawSkeletonFrame frame_with_xs(const std::vector<double>& xs) {
    RawSkeletonFrame raw;
    for (int i = 0; i < kNumJoints; ++i) {
        raw.joints[static_cast<std::size_t>(i)] = {
            xs[static_cast<std::size_t>(i) % xs.size()], 100.0 + i, 0.9};
    }
    return raw;
}

} // namespace

TEST_CASE("normalize_frame maps min and max to 0 and 1") {
    RawSkeletonFrame raw = frame_with_xs({10.0, 30.0});
    const auto out = normalize_frame(raw);
    double lo = 1.0, hi = 0.0;
    for (const auto& j : out.joints) {
        lo = std::min(lo, j.x);
        hi = std::max(hi, j.x);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("normalize_frame three-point spread") {
    RawSkeletonFrame raw;
    for (int i = 0; i < kNumJoints; ++i) {
        raw.joints[static_cast<std::size_t>(i)] = {5.0, 50.0, 1.0};
    }
    raw.joints[0] = {0.0, 50.0, 1.0};
    raw.joints[1] = {5.0, 50.0, 1.0};
    raw.joints[2] = {10.0, 50.0, 1.0};
    const auto out = normalize_frame(raw);
    CHECK(out.joints[0].x == doctest::Approx(0.0));
    CHECK(out.joints[1].x == doctest::Approx(0.5));
    CHECK(out.joints[2].x == doctest::Approx(1.0));
    // degenerate y axis
    CHECK(out.joints[0].y == 0.5);
}

TEST_CASE("normalize_frame degenerate frame maps everything to 0.5") {
    RawSkeletonFrame raw;
    for (auto& j : raw.joints) j = {42.0, -7.0, 0.3};
    const auto out = normalize_frame(raw);
    for (const auto& j : out.joints) {
        CHECK(j.x == 0.5);
        CHECK(j.y == 0.5);
        CHECK(j.c == 0.3);
    }
}

TEST_CASE("normalize_frame is exactly invariant under positive affine transforms") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        RawSkeletonFrame raw;
        for (auto& j : raw.joints) {
            j = {rng.uniform(-200.0, 800.0), rng.uniform(-100.0, 500.0),
                 rng.uniform(0.0, 1.0)};
        }
        const double a = rng.uniform(0.1, 5.0);
        const double b = rng.uniform(-50.0, 50.0);
        const double c = rng.uniform(0.1, 5.0);
        const double d = rng.uniform(-50.0, 50.0);
        RawSkeletonFrame scaled = raw;
        for (auto& j : scaled.joints) {
            j.x = a * j.x + b;
            j.y = c * j.y + d;
        }
        const auto n0 = normalize_frame(raw);
        const auto n1 = normalize_frame(scaled);
        for (int i = 0; i < kNumJoints; ++i) {
            // min-max cancels the affine map up to roundoff; require tight
            // agreement and exact [0,1] bounds
            CHECK(n0.joints[static_cast<std::size_t>(i)].x ==
                  doctest::Approx(n1.joints[static_cast<std::size_t>(i)].x).epsilon(1e-12));
            CHECK(n1.joints[static_cast<std::size_t>(i)].x >= 0.0);
            CHECK(n1.joints[static_cast<std::size_t>(i)].x <= 1.0);
        }
    }
}

TEST_CASE("map_coco17_to_19 synthesizes Neck and CHip as midpoints") {
    std::vector<Joint2D> kp17(17);
    for (int i = 0; i < 17; ++i) {
        kp17[static_cast<std::size_t>(i)] = {static_cast<double>(i), 2.0 * i,
                                             0.5 + 0.01 * i};
    }
    kp17[5] = {100.0, 200.0, 0.8}; // LShoulder
    kp17[6] = {140.0, 200.0, 0.6}; // RShoulder
    const auto out = map_coco17_to_19(kp17);
    const auto& neck = out.joints[static_cast<std::size_t>(JointId::Neck)];
    CHECK(neck.x == 120.0);
    CHECK(neck.y == 200.0);
    CHECK(neck.c == doctest::Approx(0.7));

    // identical parents
    std::vector<Joint2D> same(17, Joint2D{0.0, 0.0, 1.0});
    const auto out2 = map_coco17_to_19(same);
    const auto& chip = out2.joints[static_cast<std::size_t>(JointId::CHip)];
    CHECK(chip.x == 0.0);
    CHECK(chip.y == 0.0);
    CHECK(chip.c == 1.0);
}

TEST_CASE("map_coco17_to_19 copies the 17 originals bit-exactly") {
    Rng rng(3);
    std::vector<Joint2D> kp17(17);
    for (auto& j : kp17) {
        j = {rng.uniform(0.0, 1600.0), rng.uniform(0.0, 600.0), rng.uniform(0.0, 1.0)};
    }
    const auto out = map_coco17_to_19(kp17);
    const int coco_to_19[17] = {0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 13, 14, 15, 16, 17, 18};
    for (int i = 0; i < 17; ++i) {
        const auto& a = kp17[static_cast<std::size_t>(i)];
        const auto& b = out.joints[static_cast<std::size_t>(coco_to_19[i])];
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.c == b.c);
    }
}

TEST_CASE("map_coco17_to_19 rejects wrong keypoint counts") {
    CHECK_THROWS_AS(map_coco17_to_19(std::vector<Joint2D>(16)), std::invalid_argument);
}

TEST_CASE("topology is the canonical 18-edge tree") {
    const auto topo = build_topology();
    CHECK(topo.edges.size() == 18);
    CHECK(topo.degree(static_cast<int>(JointId::Neck)) == 4);
    CHECK(topo.degree.sum() == doctest::Approx(36.0));
    CHECK(topo.adjacency.trace() == 0.0);
    CHECK((topo.adjacency - topo.adjacency.transpose()).norm() == 0.0);

    // connected via BFS; with |E| = |V| - 1 that makes it a tree
    std::vector<bool> seen(kNumJoints, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int visited = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        ++visited;
        for (int v = 0; v < kNumJoints; ++v) {
            if (topo.adjacency(u, v) > 0.0 && !seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                q.push(v);
            }
        }
    }
    CHECK(visited == kNumJoints);
}

TEST_CASE("build_topology is deterministic") {
    const auto a = build_topology();
    const auto b = build_topology();
    CHECK(a.edges == b.edges);
    CHECK((a.adjacency - b.adjacency).norm() == 0.0);
}
