#include "auglift/harness.hpp"
#include "auglift/interchange.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>

namespace auglift::harness {

using nlohmann::json;

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string opt_fmt(const json& v, int precision = 6) { return v.is_null() ? std::string() : fmt(v.get<double>(), precision); }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

RenderedReport render_report(const std::string& run_record_json) {
  json rec;
  try {
    rec = json::parse(run_record_json);
  } catch (const json::exception& e) {
    throw Error("schema_error", std::string("run record is not valid JSON: ") + e.what());
  }
  if (!rec.contains("aggregates") || !rec["aggregates"].is_array())
    throw Error("schema_error", "run record has no aggregates");

  RenderedReport out;
  std::ostringstream csv;
  csv << kCsvHeader << '\n';
  for (const auto& a : rec["aggregates"]) {
    for (const char* stat : {"mean", "std"}) {
      const auto& m = a.at(stat);
      const bool mean = std::string(stat) == "mean";
      csv << a.at("variant").get<std::string>() << ',' << a.at("rescaling").get<std::string>() << ','
          << a.at("split").get<std::string>() << ',' << stat << ',' << fmt(m.at("mpjpe").get<double>()) << ','
          << fmt(m.at("p_mpjpe").get<double>()) << ',' << fmt(m.at("pck150").get<double>()) << ','
          << fmt(m.at("auc").get<double>()) << ',' << a.at("n_seeds").get<int>() << ','
          << (mean ? opt_fmt(a.at("delta_vs_xy_pct")) : "") << ','
          << (mean ? opt_fmt(a.at("delta_vs_no_rescale_pct")) : "") << '\n';
    }
  }
  out.csv = csv.str();

  std::ostringstream txt;
  txt << "MPJPE (mm), mean +- std over seeds; dXY = % lower error than XY in the same rescaling arm\n";
  if (rec.contains("mean_box_size")) txt << "mean box size: " << fmt(rec["mean_box_size"].get<double>(), 2) << " px\n";
  txt << '\n'
      << pad("variant", 9) << pad("rescale", 9) << pad("split", 10) << lpad("MPJPE", 18) << lpad("P-MPJPE", 10)
      << lpad("PCK150", 8) << lpad("AUC", 8) << lpad("dXY%", 9) << lpad("dOff%", 9) << lpad("seeds", 7) << '\n';
  for (const auto& a : rec["aggregates"]) {
    const auto& m = a.at("mean");
    const auto& s = a.at("std");
    const std::string err = fmt(m.at("mpjpe").get<double>(), 2) + " +- " + fmt(s.at("mpjpe").get<double>(), 2);
    txt << pad(a.at("variant").get<std::string>(), 9) << pad(a.at("rescaling").get<std::string>(), 9)
        << pad(a.at("split").get<std::string>(), 10) << lpad(err, 18) << lpad(fmt(m.at("p_mpjpe").get<double>(), 2), 10)
        << lpad(fmt(m.at("pck150").get<double>(), 3), 8) << lpad(fmt(m.at("auc").get<double>(), 3), 8)
        << lpad(opt_fmt(a.at("delta_vs_xy_pct"), 2), 9) << lpad(opt_fmt(a.at("delta_vs_no_rescale_pct"), 2), 9)
        << lpad(std::to_string(a.at("n_seeds").get<int>()), 7) << '\n';
  }
  int failed = 0;
  if (rec.contains("cells")) {
    for (const auto& c : rec["cells"]) {
      if (c.value("status", "ok") != "ok") ++failed;
    }
  }
  if (failed > 0) txt << '\n' << failed << " cell(s) failed; see run_record.json\n";
  out.text = txt.str();
  return out;
}

RenderedReport render_report_dir(const std::filesystem::path& run_dir) {
  return render_report(io::read_text_file(run_dir / "run_record.json"));
}

}  // namespace auglift::harness
