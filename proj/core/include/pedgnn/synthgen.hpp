#pragma once

#include "pedgnn/clipio.hpp"
#include "pedgnn/rng.hpp"
#include "pedgnn/skeleton.hpp"

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

namespace pedgnn {

enum class ScenarioKind {
    PerpendicularCross,
    MidLaneAbort,
    WalkAlongSidewalk,
    StandStill,
    DiagonalCross,
};

std::string_view scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(std::string_view name);

struct HeadingKey {
    double time = 0.0;    // seconds
    double heading = 0.0; // radians in the ground plane, 0 = +x, pi/2 = +z
};

// Declarative pedestrian script on the ground plane (x lateral, z forward).
// Crossings run right-to-left (-x); an abort reverses heading mid-band.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::StandStill;
    double walk_speed = 0.0; // m/s
    double start_x = 0.0;
    double start_z = 15.0;
    std::vector<HeadingKey> headings; // sorted by time
    std::optional<double> commit_time; // intention onset, seconds
    std::optional<double> abort_time;
    std::optional<double> walk_end; // pedestrian stops walking here
    double duration = 20.0;
};

struct CameraSpec {
    double focal = 1000.0;
    double cx = 800.0;
    double cy = 300.0;
    double height = 1.4;    // meters above ground
    double pitch = 0.03;    // radians, downward
    double ego_speed = 0.6; // m/s along +z
};

// Flat world: a driving-area strip road_x_min <= x <= road_x_max, sidewalks
// outside it, and the onboard pinhole camera.
struct WorldSpec {
    double road_x_min = -3.5;
    double road_x_max = 3.5;
    CameraSpec camera;
};

struct BodyModel {
    double hip_height = 0.95;
    double torso_length = 0.55;
    double neck_to_nose = 0.18;
    double head_offset = 0.12; // nose forward of the neck axis
    double shoulder_half = 0.20;
    double hip_half = 0.12;
    double upper_arm = 0.30;
    double forearm = 0.27;
    double thigh = 0.45;
    double shank = 0.45;
    double arm_swing = 0.5; // radians
    double leg_swing = 0.6; // radians
    double step_frequency = 1.8; // Hz while walking
};

struct NoiseModel {
    double jitter_sigma_px = 0.0;
    double dropout_prob = 0.0;
    bool enabled() const { return jitter_sigma_px > 0.0 || dropout_prob > 0.0; }
};

struct GeneratorConfig {
    int clip_count = 10;
    double clip_duration_s = 20.0;
    double fps = 30.0;
    int width = 1600;
    int height = 600;
    double body_scale_min = 0.9;
    double body_scale_max = 1.1;
    double speed_min = 0.8;
    double speed_max = 2.0;
    NoiseModel noise;
    std::uint64_t seed = 0;
    int retry_limit = 100;
    std::vector<ScenarioKind> scenario_mix = {
        ScenarioKind::PerpendicularCross, ScenarioKind::MidLaneAbort,
        ScenarioKind::WalkAlongSidewalk, ScenarioKind::StandStill,
        ScenarioKind::DiagonalCross};
};

// Scripted ground-plane position and heading at time t.
double heading_at(const ScenarioSpec& spec, double t);
Eigen::Vector2d pedestrian_position(const ScenarioSpec& spec, double t);

// Deterministic kinematic pose: CHip follows the scripted trajectory, limbs
// swing sinusoidally with contralateral phases; standing poses have zero
// amplitude. Joint order matches JointId. Positions are (x, y-up, z).
std::array<Eigen::Vector3d, kNumJoints> synthesize_gait(const ScenarioSpec& spec,
                                                        const BodyModel& body,
                                                        double t);

// Pinhole projection with the ego camera advanced to t. Joints behind the
// camera get confidence 0. Noise (jitter + dropout) is applied when an rng
// is given and the model is enabled; confidence is exactly 1 otherwise.
RawSkeletonFrame project(const WorldSpec& world,
                         const std::array<Eigen::Vector3d, kNumJoints>& joints,
                         double t, const NoiseModel& noise = {},
                         Rng* rng = nullptr);

// C from commit_time until the pedestrian exits the road band; NC from
// abort_time onward when set; NC otherwise.
Label label_frame(const WorldSpec& world, const ScenarioSpec& spec,
                  int frame_index, double fps);
std::vector<Label> derive_labels(const WorldSpec& world, const ScenarioSpec& spec,
                                 double fps, int n_frames);

struct ValidationResult {
    bool accepted = true;
    std::string reason;
};

// Visibility analog of the segmentation / skeleton-existence checks: reject
// when the projected bounding box is fully outside the image, or its pixel
// height is under 20 px, for strictly more than 50% of frames.
ValidationResult validate_clip(const ClipRecord& clip);

struct ClipAudit {
    std::string clip_id;
    bool accepted = false;
    std::string reject_reason;
    ScenarioSpec spec;
    WorldSpec world;
    BodyModel body;
    std::vector<Label> labels;
};

std::string audit_to_json_line(const ClipAudit& audit);
ClipAudit audit_from_json_line(const std::string& line);

struct GeneratedDataset {
    std::vector<ClipRecord> clips;
    std::vector<ClipAudit> audits; // accepted and rejected attempts
    std::vector<std::string> train_ids, val_ids, test_ids;
};

ScenarioSpec make_random_scenario(ScenarioKind kind, const GeneratorConfig& config,
                                  const WorldSpec& world, Rng& rng);

// Generates until clip_count accepted clips exist or retry_limit consecutive
// rejections occur. Each clip derives its own rng stream from
// (seed, clip index), so parallel generation would match serial output.
GeneratedDataset generate_dataset(const GeneratorConfig& config);

void write_dataset(const std::string& dir, const GeneratedDataset& dataset);

std::vector<ClipRecord> select_clips(const std::vector<ClipRecord>& clips,
                                     const std::vector<std::string>& ids);

} // namespace pedgnn
