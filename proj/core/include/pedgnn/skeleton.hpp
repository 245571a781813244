#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace pedgnn {

inline constexpr int kNumJoints = 19;

// Canonical joint indices of the 19-node skeleton graph.
enum class JointId : int {
    Nose = 0,
    LEye = 1,
    REye = 2,
    LEar = 3,
    REar = 4,
    Neck = 5,
    LShoulder = 6,
    RShoulder = 7,
    LElbow = 8,
    RElbow = 9,
    LWrist = 10,
    RWrist = 11,
    CHip = 12,
    LHip = 13,
    RHip = 14,
    LKnee = 15,
    RKnee = 16,
    LAnkle = 17,
    RAnkle = 18,
};

std::string_view joint_name(JointId id);

struct Joint2D {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0; // fitting confidence in [0,1]
};

struct RawSkeletonFrame {
    std::array<Joint2D, kNumJoints> joints{};
    int frame_index = 0;
    int pedestrian_id = 0;
};

struct NormalizedSkeletonFrame {
    std::array<Joint2D, kNumJoints> joints{}; // x,y in [0,1]
};

// One pedestrian's window of N_F consecutive normalized frames.
struct SkeletonWindow {
    std::vector<NormalizedSkeletonFrame> frames;
    int length() const { return static_cast<int>(frames.size()); }
};

// The fixed 19-node undirected tree: head star from the Nose, limbs chained
// through Neck and CHip.
struct SkeletonTopology {
    std::vector<std::pair<int, int>> edges; // 18 unordered pairs
    Eigen::MatrixXd adjacency;              // 19x19 symmetric 0/1
    Eigen::VectorXd degree;                 // length 19
};

SkeletonTopology build_topology();

// Per-frame min-max normalization over the skeleton's own 19 joints.
// A degenerate axis range (< 1e-9) maps every coordinate on that axis to 0.5.
NormalizedSkeletonFrame normalize_frame(const RawSkeletonFrame& raw);

// AlphaPose/COCO 17-keypoint order: Nose, LEye, REye, LEar, REar, LShoulder,
// RShoulder, LElbow, RElbow, LWrist, RWrist, LHip, RHip, LKnee, RKnee,
// LAnkle, RAnkle. Neck and CHip are synthesized as shoulder/hip midpoints;
// their confidence is the mean of the two parents.
RawSkeletonFrame map_coco17_to_19(const std::vector<Joint2D>& kp17,
                                  int frame_index = 0, int pedestrian_id = 0);

} // namespace pedgnn
