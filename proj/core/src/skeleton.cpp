#include "pedgnn/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pedgnn {

std::string_view joint_name(JointId id) {
    static constexpr std::array<std::string_view, kNumJoints> names = {
        "Nose", "LEye", "REye", "LEar", "REar", "Neck", "LShoulder",
        "RShoulder", "LElbow", "RElbow", "LWrist", "RWrist", "CHip",
        "LHip", "RHip", "LKnee", "RKnee", "LAnkle", "RAnkle"};
    return names.at(static_cast<std::size_t>(id));
}

SkeletonTopology build_topology() {
    SkeletonTopology topo;
    topo.edges = {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {0, 5}, {5, 6},
                  {5, 7}, {6, 8}, {7, 9}, {8, 10}, {9, 11}, {5, 12},
                  {12, 13}, {12, 14}, {13, 15}, {14, 16}, {15, 17}, {16, 18}};
    topo.adjacency = Eigen::MatrixXd::Zero(kNumJoints, kNumJoints);
    for (auto [a, b] : topo.edges) {
        topo.adjacency(a, b) = 1.0;
        topo.adjacency(b, a) = 1.0;
    }
    topo.degree = topo.adjacency.rowwise().sum();
    return topo;
}

NormalizedSkeletonFrame normalize_frame(const RawSkeletonFrame& raw) {
    constexpr double eps = 1e-9;
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    for (const auto& j : raw.joints) {
        xmin = std::min(xmin, j.x);
        xmax = std::max(xmax, j.x);
        ymin = std::min(ymin, j.y);
        ymax = std::max(ymax, j.y);
    }
    const double xrange = xmax - xmin;
    const double yrange = ymax - ymin;

    NormalizedSkeletonFrame out;
    for (int i = 0; i < kNumJoints; ++i) {
        const auto& j = raw.joints[static_cast<std::size_t>(i)];
        auto& o = out.joints[static_cast<std::size_t>(i)];
        o.x = xrange < eps ? 0.5 : (j.x - xmin) / xrange;
        o.y = yrange < eps ? 0.5 : (j.y - ymin) / yrange;
        o.c = j.c;
    }
    return out;
}

RawSkeletonFrame map_coco17_to_19(const std::vector<Joint2D>& kp17,
                                  int frame_index, int pedestrian_id) {
    if (kp17.size() != 17) {
        throw std::invalid_argument("map_coco17_to_19: expected 17 keypoints, got " +
                                    std::to_string(kp17.size()));
    }
    // COCO index -> 19-joint index for the 17 shared joints.
    static constexpr std::array<int, 17> to19 = {
        0,  // Nose
        1,  // LEye
        2,  // REye
        3,  // LEar
        4,  // REar
        6,  // LShoulder
        7,  // RShoulder
        8,  // LElbow
        9,  // RElbow
        10, // LWrist
        11, // RWrist
        13, // LHip
        14, // RHip
        15, // LKnee
        16, // RKnee
        17, // LAnkle
        18, // RAnkle
    };

    RawSkeletonFrame out;
    out.frame_index = frame_index;
    out.pedestrian_id = pedestrian_id;
    for (int i = 0; i < 17; ++i) {
        out.joints[static_cast<std::size_t>(to19[static_cast<std::size_t>(i)])] =
            kp17[static_cast<std::size_t>(i)];
    }
    const auto midpoint = [](const Joint2D& a, const Joint2D& b) {
        return Joint2D{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.c + b.c) / 2.0};
    };
    out.joints[static_cast<std::size_t>(JointId::Neck)] = midpoint(kp17[5], kp17[6]);
    out.joints[static_cast<std::size_t>(JointId::CHip)] = midpoint(kp17[11], kp17[12]);
    return out;
}

} // namespace pedgnn
