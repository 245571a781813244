#include "pedgnn/clipio.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pedgnn {

using nlohmann::json;

namespace {

json joints_to_json(const std::array<Joint2D, kNumJoints>& joints) {
    json arr = json::array();
    for (const auto& j : joints) arr.push_back({j.x, j.y, j.c});
    return arr;
}

Label parse_label(const json& j, int line_number) {
    const auto s = j.get<std::string>();
    if (s == "C") return Label::Cross;
    if (s == "NC") return Label::NoCross;
    throw std::runtime_error("clip record line " + std::to_string(line_number) +
                             ": unknown label '" + s + "'");
}

json clip_to_json(const ClipRecord& clip) {
    json frames = json::array();
    for (const auto& f : clip.frames) {
        json peds = json::array();
        for (const auto& p : f.pedestrians) {
            json jp;
            jp["pedestrian_id"] = p.pedestrian_id;
            if (p.label) {
                jp["label"] = label_name(*p.label);
            } else {
                jp["label"] = nullptr;
            }
            jp["joints"] = joints_to_json(p.joints);
            peds.push_back(std::move(jp));
        }
        frames.push_back({{"frame_index", f.frame_index}, {"pedestrians", std::move(peds)}});
    }
    return json{{"clip_id", clip.clip_id},
                {"fps", clip.fps},
                {"width", clip.width},
                {"height", clip.height},
                {"frames", std::move(frames)}};
}

} // namespace

std::string clip_to_json_line(const ClipRecord& clip) {
    return clip_to_json(clip).dump();
}

ClipRecord clip_from_json_line(const std::string& line, int line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("clip record line " + std::to_string(line_number) +
                                 ": " + e.what());
    }
    ClipRecord clip;
    try {
        clip.clip_id = j.at("clip_id").get<std::string>();
        clip.fps = j.at("fps").get<double>();
        clip.width = j.at("width").get<int>();
        clip.height = j.at("height").get<int>();
        for (const auto& jf : j.at("frames")) {
            ClipFrame frame;
            frame.frame_index = jf.at("frame_index").get<int>();
            for (const auto& jp : jf.at("pedestrians")) {
                PedestrianObservation obs;
                obs.pedestrian_id = jp.at("pedestrian_id").get<int>();
                if (!jp.at("label").is_null()) {
                    obs.label = parse_label(jp.at("label"), line_number);
                }
                const auto& joints = jp.at("joints");
                if (joints.size() != kNumJoints) {
                    throw std::runtime_error("expected 19 joints, got " +
                                             std::to_string(joints.size()));
                }
                for (int i = 0; i < kNumJoints; ++i) {
                    const auto& t = joints.at(static_cast<std::size_t>(i));
                    obs.joints[static_cast<std::size_t>(i)] = {
                        t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
                }
                frame.pedestrians.push_back(std::move(obs));
            }
            clip.frames.push_back(std::move(frame));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("clip record line " + std::to_string(line_number) +
                                 ": " + e.what());
    }
    return clip;
}

std::vector<ClipRecord> read_clip_stream(std::istream& in) {
    std::vector<ClipRecord> clips;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        clips.push_back(clip_from_json_line(line, line_number));
    }
    return clips;
}

std::vector<ClipRecord> read_clip_stream_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open clip stream: " + path);
    return read_clip_stream(in);
}

void write_clip_stream_file(const std::string& path,
                            const std::vector<ClipRecord>& clips) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write clip stream: " + path);
    for (const auto& c : clips) out << clip_to_json_line(c) << '\n';
}

ClipRecord import_clip_17(const std::string& line, int line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("clip record line " + std::to_string(line_number) +
                                 ": " + e.what());
    }
    ClipRecord clip;
    clip.clip_id = j.at("clip_id").get<std::string>();
    clip.fps = j.at("fps").get<double>();
    clip.width = j.at("width").get<int>();
    clip.height = j.at("height").get<int>();
    for (const auto& jf : j.at("frames")) {
        ClipFrame frame;
        frame.frame_index = jf.at("frame_index").get<int>();
        for (const auto& jp : jf.at("pedestrians")) {
            PedestrianObservation obs;
            obs.pedestrian_id = jp.at("pedestrian_id").get<int>();
            if (!jp.at("label").is_null()) {
                obs.label = parse_label(jp.at("label"), line_number);
            }
            const auto& joints = jp.at("joints");
            if (joints.size() == kNumJoints) {
                for (int i = 0; i < kNumJoints; ++i) {
                    const auto& t = joints.at(static_cast<std::size_t>(i));
                    obs.joints[static_cast<std::size_t>(i)] = {
                        t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
                }
            } else if (joints.size() == 17) {
                std::vector<Joint2D> kp17;
                kp17.reserve(17);
                for (const auto& t : joints) {
                    kp17.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                                    t.at(2).get<double>()});
                }
                obs.joints = map_coco17_to_19(kp17, frame.frame_index,
                                              obs.pedestrian_id)
                                 .joints;
            } else {
                throw std::runtime_error("clip record line " +
                                         std::to_string(line_number) +
                                         ": expected 17 or 19 joints, got " +
                                         std::to_string(joints.size()));
            }
            frame.pedestrians.push_back(std::move(obs));
        }
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

std::vector<ClipRecord> import_clip_stream_17_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open clip stream: " + path);
    std::vector<ClipRecord> clips;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        clips.push_back(import_clip_17(line, line_number));
    }
    return clips;
}

} // namespace pedgnn
