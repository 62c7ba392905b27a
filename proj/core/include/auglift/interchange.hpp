#pragma once

#include "auglift/skeleton.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// On-disk interchange formats shared with external producers.
//
//   detections.jsonl  {"frame_id": n, "subject_id": n, "keypoints": [[x, y, c], ...]}
//   gt.jsonl          {"frame_id": n, "joints_mm": [[X, Y, Z], ...]}
//   augmented.jsonl   {"frame_id": n, "features": [[x, y, c~, d~], ...],
//                      "degenerate_bbox": bool, "od": [...]?}
//   depth/NNNNNN.pfm  grayscale PFM ("Pf"), scale -1.0 (little-endian),
//                     scanlines stored bottom-to-top as the format requires.
namespace auglift::io {

void write_pfm(const std::filesystem::path& path, const DepthRaster& raster);
/// Rejects malformed headers, big-endian files, truncated data and NaN.
DepthRaster read_pfm(const std::filesystem::path& path);

std::string pfm_name(std::int64_t frame_id);

std::string detection_to_json(const DetectionFrame& frame);
DetectionFrame detection_from_json(const std::string& line);

struct GroundTruthRecord {
  std::int64_t frame_id = 0;
  Pose3D pose;
};

std::string ground_truth_to_json(const GroundTruthRecord& record);
GroundTruthRecord ground_truth_from_json(const std::string& line);

std::string augmented_to_json(const AugmentedPose& pose);
AugmentedPose augmented_from_json(const std::string& line);

/// Throws if the pose breaks AugmentedPose invariants for the given bounds.
void validate(const AugmentedPose& pose, double clip_lower, double d_max);

/// Reads non-empty lines from a JSON-lines file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::vector<DetectionFrame> read_detections(const std::filesystem::path& path);
std::vector<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path);
std::vector<AugmentedPose> read_augmented(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace auglift::io
