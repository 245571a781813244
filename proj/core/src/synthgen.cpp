#include "pedgnn/synthgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace pedgnn {

using nlohmann::json;

std::string_view scenario_kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::PerpendicularCross: return "perpendicular_cross";
        case ScenarioKind::MidLaneAbort: return "mid_lane_abort";
        case ScenarioKind::WalkAlongSidewalk: return "walk_along_sidewalk";
        case ScenarioKind::StandStill: return "stand_still";
        case ScenarioKind::DiagonalCross: return "diagonal_cross";
    }
    return "unknown";
}

ScenarioKind scenario_kind_from_name(std::string_view name) {
    for (ScenarioKind k : {ScenarioKind::PerpendicularCross, ScenarioKind::MidLaneAbort,
                           ScenarioKind::WalkAlongSidewalk, ScenarioKind::StandStill,
                           ScenarioKind::DiagonalCross}) {
        if (scenario_kind_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown scenario kind: " + std::string(name));
}

double heading_at(const ScenarioSpec& spec, double t) {
    double h = spec.headings.empty() ? 0.0 : spec.headings.front().heading;
    for (const auto& key : spec.headings) {
        if (key.time <= t) h = key.heading;
    }
    return h;
}

namespace {

double move_start(const ScenarioSpec& spec) {
    return spec.commit_time.value_or(0.0);
}

double move_end(const ScenarioSpec& spec) {
    return spec.walk_end.value_or(spec.duration);
}

} // namespace

Eigen::Vector2d pedestrian_position(const ScenarioSpec& spec, double t) {
    Eigen::Vector2d pos(spec.start_x, spec.start_z);
    if (spec.walk_speed <= 0.0) return pos;
    const double t0 = move_start(spec);
    const double t1 = std::min(t, move_end(spec));
    if (t1 <= t0) return pos;

    // Integrate over the piecewise-constant heading timeline.
    std::vector<double> cuts = {t0, t1};
    for (const auto& key : spec.headings) {
        if (key.time > t0 && key.time < t1) cuts.push_back(key.time);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double h = heading_at(spec, cuts[i]);
        const double dt = cuts[i + 1] - cuts[i];
        pos.x() += spec.walk_speed * dt * std::cos(h);
        pos.y() += spec.walk_speed * dt * std::sin(h);
    }
    return pos;
}

std::array<Eigen::Vector3d, kNumJoints> synthesize_gait(const ScenarioSpec& spec,
                                                        const BodyModel& body,
                                                        double t) {
    if (t < 0.0 || t > spec.duration) {
        throw std::invalid_argument("synthesize_gait: t outside clip duration");
    }
    const Eigen::Vector2d ground = pedestrian_position(spec, t);
    const double theta = heading_at(spec, t);
    const Eigen::Vector3d fwd(std::cos(theta), 0.0, std::sin(theta));
    const Eigen::Vector3d up(0.0, 1.0, 0.0);
    const Eigen::Vector3d right = fwd.cross(up); // (sin, 0, -cos)

    // Swing amplitude ramps in and out around the walking interval so joints
    // stay continuous in t.
    double amp = 0.0;
    if (spec.walk_speed > 0.0) {
        const double t0 = move_start(spec);
        const double t1 = move_end(spec);
        constexpr double ramp = 0.3;
        const double in = std::clamp((t - t0) / ramp, 0.0, 1.0);
        const double out = std::clamp((t1 - t) / ramp, 0.0, 1.0);
        amp = in * out;
    }
    const double phase =
        2.0 * M_PI * body.step_frequency * std::max(0.0, t - move_start(spec));

    std::array<Eigen::Vector3d, kNumJoints> j;
    const auto at = [&j](JointId id) -> Eigen::Vector3d& {
        return j[static_cast<std::size_t>(id)];
    };

    const Eigen::Vector3d chip(ground.x(), body.hip_height, ground.y());
    at(JointId::CHip) = chip;
    at(JointId::Neck) = chip + up * body.torso_length;
    at(JointId::Nose) =
        at(JointId::Neck) + up * body.neck_to_nose + fwd * body.head_offset;
    at(JointId::LEye) = at(JointId::Nose) + up * 0.03 + right * 0.03 - fwd * 0.03;
    at(JointId::REye) = at(JointId::Nose) + up * 0.03 - right * 0.03 - fwd * 0.03;
    at(JointId::LEar) = at(JointId::Nose) + up * 0.02 + right * 0.07 - fwd * 0.08;
    at(JointId::REar) = at(JointId::Nose) + up * 0.02 - right * 0.07 - fwd * 0.08;
    at(JointId::LShoulder) = at(JointId::Neck) + right * body.shoulder_half;
    at(JointId::RShoulder) = at(JointId::Neck) - right * body.shoulder_half;
    at(JointId::LHip) = chip + right * body.hip_half;
    at(JointId::RHip) = chip - right * body.hip_half;

    // Unit swing direction at angle a from straight down, in the sagittal
    // plane; up and fwd are orthonormal so segment lengths are exact.
    const auto swing_dir = [&](double a) {
        return Eigen::Vector3d(-up * std::cos(a) + fwd * std::sin(a));
    };

    const double arm_l = amp * body.arm_swing * std::sin(phase + M_PI);
    const double arm_r = amp * body.arm_swing * std::sin(phase);
    at(JointId::LElbow) = at(JointId::LShoulder) + body.upper_arm * swing_dir(arm_l);
    at(JointId::RElbow) = at(JointId::RShoulder) + body.upper_arm * swing_dir(arm_r);
    at(JointId::LWrist) = at(JointId::LElbow) + body.forearm * swing_dir(arm_l * 0.8);
    at(JointId::RWrist) = at(JointId::RElbow) + body.forearm * swing_dir(arm_r * 0.8);

    const double leg_l = amp * body.leg_swing * std::sin(phase);
    const double leg_r = amp * body.leg_swing * std::sin(phase + M_PI);
    at(JointId::LKnee) = at(JointId::LHip) + body.thigh * swing_dir(leg_l);
    at(JointId::RKnee) = at(JointId::RHip) + body.thigh * swing_dir(leg_r);
    at(JointId::LAnkle) = at(JointId::LKnee) + body.shank * swing_dir(leg_l * 0.6);
    at(JointId::RAnkle) = at(JointId::RKnee) + body.shank * swing_dir(leg_r * 0.6);
    return j;
}

RawSkeletonFrame project(const WorldSpec& world,
                         const std::array<Eigen::Vector3d, kNumJoints>& joints,
                         double t, const NoiseModel& noise, Rng* rng) {
    const CameraSpec& cam = world.camera;
    const double cam_z = cam.ego_speed * t;
    const double c = std::cos(cam.pitch);
    const double s = std::sin(cam.pitch);

    RawSkeletonFrame frame;
    for (int i = 0; i < kNumJoints; ++i) {
        const Eigen::Vector3d& p = joints[static_cast<std::size_t>(i)];
        const double dx = p.x();
        const double dy = p.y() - cam.height;
        const double dz = p.z() - cam_z;
        const double xc = dx;
        const double yc = -c * dy - s * dz;
        const double zc = -s * dy + c * dz;
        auto& out = frame.joints[static_cast<std::size_t>(i)];
        if (zc < 0.1) { // behind (or on) the camera
            out = {0.0, 0.0, 0.0};
            continue;
        }
        out.x = cam.focal * xc / zc + cam.cx;
        out.y = cam.focal * yc / zc + cam.cy;
        out.c = 1.0;
        if (noise.enabled() && rng) {
            double jx = 0.0, jy = 0.0;
            if (noise.jitter_sigma_px > 0.0) {
                jx = rng->normal(0.0, noise.jitter_sigma_px);
                jy = rng->normal(0.0, noise.jitter_sigma_px);
                out.x += jx;
                out.y += jy;
                const double mag = std::sqrt(jx * jx + jy * jy);
                out.c = std::max(0.0, 1.0 - mag / (6.0 * noise.jitter_sigma_px));
            }
            if (noise.dropout_prob > 0.0 && rng->bernoulli(noise.dropout_prob)) {
                out.c = 0.0;
            }
        }
    }
    return frame;
}

std::vector<Label> derive_labels(const WorldSpec& world, const ScenarioSpec& spec,
                                 double fps, int n_frames) {
    std::vector<Label> labels(static_cast<std::size_t>(n_frames), Label::NoCross);
    if (!spec.commit_time) return labels;

    // Exit time: first frame time, after the pedestrian has been inside the
    // road band, at which it is outside again.
    double exit_time = std::numeric_limits<double>::infinity();
    bool entered = false;
    for (int f = 0; f < n_frames; ++f) {
        const double t = static_cast<double>(f) / fps;
        const double x = pedestrian_position(spec, t).x();
        const bool inside = x >= world.road_x_min && x <= world.road_x_max;
        if (inside) entered = true;
        if (entered && !inside) {
            exit_time = t;
            break;
        }
    }
    for (int f = 0; f < n_frames; ++f) {
        const double t = static_cast<double>(f) / fps;
        if (spec.abort_time && t >= *spec.abort_time) continue;
        if (t >= *spec.commit_time && t < exit_time) {
            labels[static_cast<std::size_t>(f)] = Label::Cross;
        }
    }
    return labels;
}

Label label_frame(const WorldSpec& world, const ScenarioSpec& spec,
                  int frame_index, double fps) {
    const int horizon =
        std::max(frame_index + 1, static_cast<int>(spec.duration * fps));
    return derive_labels(world, spec, fps, horizon)[static_cast<std::size_t>(frame_index)];
}

ValidationResult validate_clip(const ClipRecord& clip) {
    int off_screen = 0;
    int too_small = 0;
    int total = 0;
    for (const auto& frame : clip.frames) {
        for (const auto& obs : frame.pedestrians) {
            ++total;
            double xmin = 1e30, xmax = -1e30, ymin = 1e30, ymax = -1e30;
            bool any = false;
            for (const auto& j : obs.joints) {
                if (j.c <= 0.0) continue;
                any = true;
                xmin = std::min(xmin, j.x);
                xmax = std::max(xmax, j.x);
                ymin = std::min(ymin, j.y);
                ymax = std::max(ymax, j.y);
            }
            const bool outside = !any || xmax < 0.0 || xmin > clip.width ||
                                 ymax < 0.0 || ymin > clip.height;
            if (outside) {
                ++off_screen;
                ++too_small;
                continue;
            }
            if (ymax - ymin < 20.0) ++too_small;
        }
    }
    if (total == 0) return {false, "off_screen"};
    if (2 * off_screen > total) return {false, "off_screen"};
    if (2 * too_small > total) return {false, "too_small"};
    return {true, ""};
}

ScenarioSpec make_random_scenario(ScenarioKind kind, const GeneratorConfig& config,
                                  const WorldSpec& world, Rng& rng) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.duration = config.clip_duration_s;
    spec.start_z = rng.uniform(12.0, 30.0);

    const double far_stop = world.road_x_min - 1.0;
    switch (kind) {
        case ScenarioKind::PerpendicularCross:
        case ScenarioKind::DiagonalCross: {
            spec.walk_speed = rng.uniform(config.speed_min, config.speed_max);
            spec.start_x = world.road_x_max + rng.uniform(0.8, 2.0);
            spec.commit_time = rng.uniform(1.0, 3.0);
            double heading = M_PI;
            if (kind == ScenarioKind::DiagonalCross) {
                heading += rng.uniform(-0.45, 0.45);
            }
            spec.headings = {{0.0, heading}};
            // Lateral distance covered per second is speed*|cos(heading)|.
            const double lateral = spec.walk_speed * std::abs(std::cos(heading));
            spec.walk_end = *spec.commit_time + (spec.start_x - far_stop) / lateral;
            break;
        }
        case ScenarioKind::MidLaneAbort: {
            spec.walk_speed = rng.uniform(config.speed_min, config.speed_max);
            spec.start_x = world.road_x_max + rng.uniform(0.8, 2.0);
            spec.commit_time = rng.uniform(1.0, 2.5);
            const double abort_x =
                rng.uniform(world.road_x_min + 0.5, world.road_x_max - 0.5);
            const double out = (spec.start_x - abort_x) / spec.walk_speed;
            spec.abort_time = *spec.commit_time + out;
            spec.headings = {{0.0, M_PI}, {*spec.abort_time, 0.0}};
            spec.walk_end = *spec.abort_time + out; // back at the start
            break;
        }
        case ScenarioKind::WalkAlongSidewalk: {
            spec.walk_speed = rng.uniform(config.speed_min,
                                          std::min(config.speed_max, 1.5));
            const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
            spec.start_x = side * (world.road_x_max + rng.uniform(0.8, 2.0));
            spec.headings = {{0.0, M_PI / 2.0}}; // along the road, away
            break;
        }
        case ScenarioKind::StandStill: {
            spec.walk_speed = 0.0;
            const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
            spec.start_x = side * (world.road_x_max + rng.uniform(0.5, 2.5));
            spec.headings = {{0.0, rng.uniform(0.0, 2.0 * M_PI)}};
            break;
        }
    }
    return spec;
}

namespace {

BodyModel scaled_body(const GeneratorConfig& config, Rng& rng) {
    const double s = rng.uniform(config.body_scale_min, config.body_scale_max);
    BodyModel b;
    b.hip_height *= s;
    b.torso_length *= s;
    b.neck_to_nose *= s;
    b.head_offset *= s;
    b.shoulder_half *= s;
    b.hip_half *= s;
    b.upper_arm *= s;
    b.forearm *= s;
    b.thigh *= s;
    b.shank *= s;
    return b;
}

json spec_to_json(const ScenarioSpec& s) {
    json headings = json::array();
    for (const auto& k : s.headings) headings.push_back({k.time, k.heading});
    json j{{"kind", scenario_kind_name(s.kind)},
           {"walk_speed", s.walk_speed},
           {"start_x", s.start_x},
           {"start_z", s.start_z},
           {"headings", headings},
           {"duration", s.duration}};
    j["commit_time"] = s.commit_time ? json(*s.commit_time) : json(nullptr);
    j["abort_time"] = s.abort_time ? json(*s.abort_time) : json(nullptr);
    j["walk_end"] = s.walk_end ? json(*s.walk_end) : json(nullptr);
    return j;
}

ScenarioSpec spec_from_json(const json& j) {
    ScenarioSpec s;
    s.kind = scenario_kind_from_name(j.at("kind").get<std::string>());
    s.walk_speed = j.at("walk_speed").get<double>();
    s.start_x = j.at("start_x").get<double>();
    s.start_z = j.at("start_z").get<double>();
    for (const auto& k : j.at("headings")) {
        s.headings.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
    }
    s.duration = j.at("duration").get<double>();
    if (!j.at("commit_time").is_null()) s.commit_time = j.at("commit_time").get<double>();
    if (!j.at("abort_time").is_null()) s.abort_time = j.at("abort_time").get<double>();
    if (!j.at("walk_end").is_null()) s.walk_end = j.at("walk_end").get<double>();
    return s;
}

json world_to_json(const WorldSpec& w) {
    return json{{"road_x_min", w.road_x_min},
                {"road_x_max", w.road_x_max},
                {"focal", w.camera.focal},
                {"cx", w.camera.cx},
                {"cy", w.camera.cy},
                {"cam_height", w.camera.height},
                {"pitch", w.camera.pitch},
                {"ego_speed", w.camera.ego_speed}};
}

WorldSpec world_from_json(const json& j) {
    WorldSpec w;
    w.road_x_min = j.at("road_x_min").get<double>();
    w.road_x_max = j.at("road_x_max").get<double>();
    w.camera.focal = j.at("focal").get<double>();
    w.camera.cx = j.at("cx").get<double>();
    w.camera.cy = j.at("cy").get<double>();
    w.camera.height = j.at("cam_height").get<double>();
    w.camera.pitch = j.at("pitch").get<double>();
    w.camera.ego_speed = j.at("ego_speed").get<double>();
    return w;
}

json body_to_json(const BodyModel& b) {
    return json{{"hip_height", b.hip_height},
                {"torso_length", b.torso_length},
                {"neck_to_nose", b.neck_to_nose},
                {"head_offset", b.head_offset},
                {"shoulder_half", b.shoulder_half},
                {"hip_half", b.hip_half},
                {"upper_arm", b.upper_arm},
                {"forearm", b.forearm},
                {"thigh", b.thigh},
                {"shank", b.shank},
                {"arm_swing", b.arm_swing},
                {"leg_swing", b.leg_swing},
                {"step_frequency", b.step_frequency}};
}

BodyModel body_from_json(const json& j) {
    BodyModel b;
    b.hip_height = j.at("hip_height").get<double>();
    b.torso_length = j.at("torso_length").get<double>();
    b.neck_to_nose = j.at("neck_to_nose").get<double>();
    b.head_offset = j.at("head_offset").get<double>();
    b.shoulder_half = j.at("shoulder_half").get<double>();
    b.hip_half = j.at("hip_half").get<double>();
    b.upper_arm = j.at("upper_arm").get<double>();
    b.forearm = j.at("forearm").get<double>();
    b.thigh = j.at("thigh").get<double>();
    b.shank = j.at("shank").get<double>();
    b.arm_swing = j.at("arm_swing").get<double>();
    b.leg_swing = j.at("leg_swing").get<double>();
    b.step_frequency = j.at("step_frequency").get<double>();
    return b;
}

} // namespace

std::string audit_to_json_line(const ClipAudit& audit) {
    json labels = json::array();
    for (Label l : audit.labels) labels.push_back(label_name(l));
    json j{{"clip_id", audit.clip_id},
           {"accepted", audit.accepted},
           {"reject_reason", audit.reject_reason},
           {"scenario", spec_to_json(audit.spec)},
           {"world", world_to_json(audit.world)},
           {"body", body_to_json(audit.body)},
           {"labels", std::move(labels)}};
    return j.dump();
}

ClipAudit audit_from_json_line(const std::string& line) {
    const json j = json::parse(line);
    ClipAudit a;
    a.clip_id = j.at("clip_id").get<std::string>();
    a.accepted = j.at("accepted").get<bool>();
    a.reject_reason = j.at("reject_reason").get<std::string>();
    a.spec = spec_from_json(j.at("scenario"));
    a.world = world_from_json(j.at("world"));
    a.body = body_from_json(j.at("body"));
    for (const auto& l : j.at("labels")) {
        a.labels.push_back(l.get<std::string>() == "C" ? Label::Cross : Label::NoCross);
    }
    return a;
}

GeneratedDataset generate_dataset(const GeneratorConfig& config) {
    if (config.clip_count < 1) throw std::invalid_argument("clip_count must be >= 1");
    if (config.fps <= 0.0) throw std::invalid_argument("fps must be > 0");
    if (config.scenario_mix.empty()) {
        throw std::invalid_argument("scenario mix must be nonempty");
    }

    GeneratedDataset out;
    const Rng root(config.seed);
    const Rng clips_root = root.child("clips");

    int consecutive_rejects = 0;
    std::map<std::string, int> reject_counts;
    std::uint64_t attempt = 0;
    const int n_frames =
        static_cast<int>(std::lround(config.clip_duration_s * config.fps));

    while (static_cast<int>(out.clips.size()) < config.clip_count) {
        Rng rng = clips_root.child(attempt);
        Rng scene_rng = rng.child("scene");
        Rng noise_rng = rng.child("noise");
        ++attempt;

        WorldSpec world;
        world.camera.ego_speed = scene_rng.uniform(0.3, 1.0);
        const ScenarioKind kind = config.scenario_mix[static_cast<std::size_t>(
            scene_rng.uniform_index(config.scenario_mix.size()))];
        const ScenarioSpec spec = make_random_scenario(kind, config, world, scene_rng);
        const BodyModel body = scaled_body(config, scene_rng);

        char id[32];
        std::snprintf(id, sizeof(id), "clip_%05llu",
                      static_cast<unsigned long long>(attempt - 1));

        ClipRecord clip;
        clip.clip_id = id;
        clip.fps = config.fps;
        clip.width = config.width;
        clip.height = config.height;
        const std::vector<Label> labels =
            derive_labels(world, spec, config.fps, n_frames);
        for (int f = 0; f < n_frames; ++f) {
            const double t = static_cast<double>(f) / config.fps;
            const auto pose = synthesize_gait(spec, body, t);
            RawSkeletonFrame raw = project(world, pose, t, config.noise, &noise_rng);
            ClipFrame frame;
            frame.frame_index = f;
            PedestrianObservation obs;
            obs.pedestrian_id = 0;
            obs.label = labels[static_cast<std::size_t>(f)];
            obs.joints = raw.joints;
            frame.pedestrians.push_back(std::move(obs));
            clip.frames.push_back(std::move(frame));
        }

        ClipAudit audit;
        audit.clip_id = clip.clip_id;
        audit.spec = spec;
        audit.world = world;
        audit.body = body;
        audit.labels = labels;

        const ValidationResult check = validate_clip(clip);
        if (check.accepted) {
            audit.accepted = true;
            out.clips.push_back(std::move(clip));
            consecutive_rejects = 0;
        } else {
            audit.accepted = false;
            audit.reject_reason = check.reason;
            ++reject_counts[check.reason];
            if (++consecutive_rejects > config.retry_limit) {
                std::string dominant = "unknown";
                int best = -1;
                for (const auto& [reason, count] : reject_counts) {
                    if (count > best) {
                        best = count;
                        dominant = reason;
                    }
                }
                throw std::runtime_error(
                    "generate_dataset: retry limit exhausted, dominant rejection: " +
                    dominant);
            }
        }
        out.audits.push_back(std::move(audit));
    }

    // Fixed random 80/10/10 split by clip.
    std::vector<std::size_t> order(out.clips.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = root.child("split");
    std::shuffle(order.begin(), order.end(), split_rng.engine());
    const std::size_t n = order.size();
    std::size_t n_val = n >= 10 ? n / 10 : (n >= 3 ? 1 : 0);
    std::size_t n_test = n_val;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& cid = out.clips[order[i]].clip_id;
        if (i < n_test) out.test_ids.push_back(cid);
        else if (i < n_test + n_val) out.val_ids.push_back(cid);
        else out.train_ids.push_back(cid);
    }
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.val_ids.begin(), out.val_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    return out;
}

std::vector<ClipRecord> select_clips(const std::vector<ClipRecord>& clips,
                                     const std::vector<std::string>& ids) {
    std::vector<ClipRecord> out;
    for (const auto& c : clips) {
        if (std::find(ids.begin(), ids.end(), c.clip_id) != ids.end()) {
            out.push_back(c);
        }
    }
    return out;
}

void write_dataset(const std::string& dir, const GeneratedDataset& dataset) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_clip_stream_file(dir + "/clips.jsonl", dataset.clips);
    write_clip_stream_file(dir + "/train.jsonl",
                           select_clips(dataset.clips, dataset.train_ids));
    write_clip_stream_file(dir + "/val.jsonl",
                           select_clips(dataset.clips, dataset.val_ids));
    write_clip_stream_file(dir + "/test.jsonl",
                           select_clips(dataset.clips, dataset.test_ids));
    {
        std::ofstream out(dir + "/manifest.jsonl");
        if (!out) throw std::runtime_error("cannot write manifest");
        for (const auto& a : dataset.audits) out << audit_to_json_line(a) << '\n';
    }
    {
        std::ofstream out(dir + "/splits.json");
        if (!out) throw std::runtime_error("cannot write splits");
        out << json{{"train", dataset.train_ids},
                    {"val", dataset.val_ids},
                    {"test", dataset.test_ids}}
                   .dump(2)
            << '\n';
    }
}

} // namespace pedgnn
