#include "auglift/interchange.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace auglift::io {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");

std::string read_header_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch) && std::isspace(static_cast<unsigned char>(ch))) {
  }
  if (!in) return tok;
  tok.push_back(ch);
  while (in.get(ch) && !std::isspace(static_cast<unsigned char>(ch))) tok.push_back(ch);
  // `ch` is the single whitespace byte that terminates the header field.
  return tok;
}

json parse_line(const std::string& line, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error("invalid_json", std::string("malformed ") + what + " line: " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name, const char* what) {
  if (!j.contains(name)) throw Error("invalid_json", std::string(what) + " line is missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error("invalid_json", std::string(what) + " field '" + name + "': " + e.what());
  }
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const DepthRaster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path.string() + " for writing");
  out << "Pf\n" << raster.width() << ' ' << raster.height() << "\n-1.0\n";
  const auto data = raster.data();
  const auto w = static_cast<std::size_t>(raster.width());
  for (int v = raster.height() - 1; v >= 0; --v) {
    out.write(reinterpret_cast<const char*>(data.data() + static_cast<std::size_t>(v) * w),
              static_cast<std::streamsize>(w * sizeof(float)));
  }
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

DepthRaster read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  const std::string magic = read_header_token(in);
  if (magic != "Pf") throw Error("invalid_pfm", path.string() + ": expected grayscale 'Pf' header");
  const std::string ws = read_header_token(in);
  const std::string hs = read_header_token(in);
  const std::string ss = read_header_token(in);
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(ws);
    height = std::stoi(hs);
    scale = std::stod(ss);
  } catch (const std::exception&) {
    throw Error("invalid_pfm", path.string() + ": malformed header");
  }
  if (width <= 0 || height <= 0) throw Error("invalid_pfm", path.string() + ": bad dimensions");
  if (!(scale < 0.0)) throw Error("invalid_pfm", path.string() + ": only little-endian PFM (negative scale) is supported");

  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  std::vector<float> data(w * h);
  for (std::size_t row = 0; row < h; ++row) {
    float* dst = data.data() + (h - 1 - row) * w;
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(w * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(w * sizeof(float)))
      throw Error("invalid_pfm", path.string() + ": truncated pixel data");
  }
  for (float d : data) {
    if (std::isnan(d)) throw Error("invalid_pfm", path.string() + ": raster contains NaN");
  }
  try {
    return DepthRaster(width, height, std::move(data));
  } catch (const Error& e) {
    throw Error("invalid_pfm", path.string() + ": " + e.what());
  }
}

std::string pfm_name(std::int64_t frame_id) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << frame_id << ".pfm";
  return os.str();
}

std::string detection_to_json(const DetectionFrame& frame) {
  json kps = json::array();
  for (int j = 0; j < frame.joint_count(); ++j) {
    const auto& p = frame.pose.coords[static_cast<std::size_t>(j)];
    kps.push_back({p.x(), p.y(), frame.conf.values[static_cast<std::size_t>(j)]});
  }
  json j = {{"frame_id", frame.frame_id}, {"subject_id", frame.subject_id}, {"keypoints", std::move(kps)}};
  return j.dump();
}

DetectionFrame detection_from_json(const std::string& line) {
  const json j = parse_line(line, "detection");
  DetectionFrame f;
  f.frame_id = field<std::int64_t>(j, "frame_id", "detection");
  f.subject_id = field<std::int64_t>(j, "subject_id", "detection");
  const auto kps = field<std::vector<std::vector<double>>>(j, "keypoints", "detection");
  for (const auto& kp : kps) {
    if (kp.size() != 3) throw Error("invalid_json", "detection keypoint must be [x, y, c]");
    f.pose.coords.emplace_back(kp[0], kp[1]);
    f.conf.values.push_back(kp[2]);
  }
  validate(f);
  return f;
}

std::string ground_truth_to_json(const GroundTruthRecord& record) {
  json joints = json::array();
  for (const auto& p : record.pose.joints) joints.push_back({p.x(), p.y(), p.z()});
  json j = {{"frame_id", record.frame_id}, {"joints_mm", std::move(joints)}};
  return j.dump();
}

GroundTruthRecord ground_truth_from_json(const std::string& line) {
  const json j = parse_line(line, "ground-truth");
  GroundTruthRecord r;
  r.frame_id = field<std::int64_t>(j, "frame_id", "ground-truth");
  for (const auto& p : field<std::vector<std::vector<double>>>(j, "joints_mm", "ground-truth")) {
    if (p.size() != 3) throw Error("invalid_json", "ground-truth joint must be [X, Y, Z]");
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw Error("invalid_json", "ground-truth joint is not finite");
    r.pose.joints.emplace_back(p[0], p[1], p[2]);
  }
  return r;
}

std::string augmented_to_json(const AugmentedPose& pose) {
  json feats = json::array();
  for (const auto& f : pose.features) feats.push_back({f.x, f.y, f.conf, f.depth});
  json j = {{"frame_id", pose.frame_id}, {"features", std::move(feats)}, {"degenerate_bbox", pose.degenerate_bbox}};
  if (pose.od) j["od"] = *pose.od;
  return j.dump();
}

AugmentedPose augmented_from_json(const std::string& line) {
  const json j = parse_line(line, "augmented");
  AugmentedPose p;
  p.frame_id = field<std::int64_t>(j, "frame_id", "augmented");
  p.degenerate_bbox = field<bool>(j, "degenerate_bbox", "augmented");
  for (const auto& f : field<std::vector<std::vector<double>>>(j, "features", "augmented")) {
    if (f.size() != 4) throw Error("invalid_json", "augmented feature must be [x, y, c, d]");
    p.features.push_back({f[0], f[1], f[2], f[3]});
  }
  if (j.contains("od")) {
    p.od = field<std::vector<double>>(j, "od", "augmented");
    if (static_cast<int>(p.od->size()) != p.size()) throw Error("invalid_json", "od channel length differs from K");
  }
  return p;
}

void validate(const AugmentedPose& pose, double clip_lower, double d_max) {
  for (const auto& f : pose.features) {
    if (!std::isfinite(f.x) || !std::isfinite(f.y))
      throw Error("invalid_augmented", "non-finite keypoint in frame " + std::to_string(pose.frame_id));
    if (!(f.conf >= -1.0 && f.conf <= 1.0))
      throw Error("invalid_augmented", "confidence outside [-1, 1] in frame " + std::to_string(pose.frame_id));
    if (!(f.depth >= clip_lower && f.depth <= d_max))
      throw Error("invalid_augmented", "depth outside clip range in frame " + std::to_string(pose.frame_id));
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<DetectionFrame> read_detections(const std::filesystem::path& path) {
  std::vector<DetectionFrame> out;
  for (const auto& l : read_lines(path)) out.push_back(detection_from_json(l));
  return out;
}

std::vector<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path) {
  std::vector<GroundTruthRecord> out;
  for (const auto& l : read_lines(path)) out.push_back(ground_truth_from_json(l));
  return out;
}

std::vector<AugmentedPose> read_augmented(const std::filesystem::path& path) {
  std::vector<AugmentedPose> out;
  for (const auto& l : read_lines(path)) out.push_back(augmented_from_json(l));
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io_error", "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error("io_error", "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace auglift::io
