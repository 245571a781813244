#pragma once

#include "pedgnn/skeleton.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pedgnn {

enum class Label { NoCross = 0, Cross = 1 };

inline const char* label_name(Label l) { return l == Label::Cross ? "C" : "NC"; }

struct PedestrianObservation {
    int pedestrian_id = 0;
    std::optional<Label> label; // null = excluded from metric accounting
    std::array<Joint2D, kNumJoints> joints{};
};

struct ClipFrame {
    int frame_index = 0;
    std::vector<PedestrianObservation> pedestrians;
};

// One labeled clip: per-frame raw keypoints, confidences, and C/NC labels.
struct ClipRecord {
    std::string clip_id;
    double fps = 30.0;
    int width = 1600;
    int height = 600;
    std::vector<ClipFrame> frames;
};

// Clip record stream: one JSON object per line.
std::string clip_to_json_line(const ClipRecord& clip);
ClipRecord clip_from_json_line(const std::string& line, int line_number = 0);

std::vector<ClipRecord> read_clip_stream(std::istream& in);
std::vector<ClipRecord> read_clip_stream_file(const std::string& path);
void write_clip_stream_file(const std::string& path,
                            const std::vector<ClipRecord>& clips);

// 17-keypoint records (joints arrays of 17 triples, COCO order) become
// 19-joint records via map_coco17_to_19. 19-joint records pass through.
ClipRecord import_clip_17(const std::string& line, int line_number = 0);
std::vector<ClipRecord> import_clip_stream_17_file(const std::string& path);

} // namespace pedgnn
