#include "oreal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "oreal/io.hpp"
#include "oreal/metrics.hpp"

namespace oreal {

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

StrategySummary summarize(std::string label, nlohmann::json config, double reference_miou,
                          std::vector<RunRecord> records) {
  StrategySummary s;
  s.label = std::move(label);
  s.config = std::move(config);
  s.reference_miou = reference_miou;
  s.records = std::move(records);

  std::map<std::uint64_t, ALCurve> per_seed;
  std::map<std::size_t, std::vector<double>> per_step_miou;
  std::map<std::size_t, std::vector<double>> per_step_clicks;
  for (const auto& r : s.records) {
    auto& curve = per_seed[r.seed];
    curve.reference = reference_miou;
    curve.points.push_back(CurvePoint{static_cast<double>(r.clicks), r.miou_test});
    per_step_miou[r.step].push_back(r.miou_test);
    per_step_clicks[r.step].push_back(static_cast<double>(r.clicks));
  }
  for (const auto& [seed, curve] : per_seed) {
    if (curve.points.size() >= 2 && reference_miou > 0.0) s.aualc_per_seed.push_back(aualc(curve));
  }
  s.aualc_mean = mean_of(s.aualc_per_seed);
  s.aualc_std = sample_std(s.aualc_per_seed);
  for (const auto& [step, values] : per_step_miou) {
    s.curve.push_back(CurveStat{step, mean_of(per_step_clicks[step]), mean_of(values), sample_std(values)});
  }
  return s;
}

StrategySummary summarize(const ExperimentResult& result) {
  std::vector<RunRecord> records;
  for (const auto& seed : result.seeds) {
    records.insert(records.end(), seed.records.begin(), seed.records.end());
  }
  nlohmann::json config = result.config;
  return summarize(result.config.label(), std::move(config), result.reference.miou_test,
                   std::move(records));
}

nlohmann::json summary_document(std::span<const StrategySummary> strategies) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : strategies) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& c : s.curve) {
      curve.push_back({{"step", c.step},
                       {"clicks", c.clicks},
                       {"miou_mean", c.miou_mean},
                       {"miou_std", c.miou_std}});
    }
    list.push_back({{"label", s.label},
                    {"config", s.config},
                    {"reference_miou", s.reference_miou},
                    {"aualc_mean", s.aualc_mean},
                    {"aualc_std", s.aualc_std},
                    {"aualc_per_seed", s.aualc_per_seed},
                    {"curve", curve}});
  }
  return nlohmann::json{{"format_version", kResultsFormatVersion},
                        {"curve_start", "after_step_1"},
                        {"strategies", list}};
}

std::string dump_summary(const nlohmann::json& document) { return document.dump(2) + "\n"; }

std::string render_curves_svg(std::span<const StrategySummary> strategies) {
  constexpr double kWidth = 640.0, kHeight = 400.0;
  constexpr double kLeft = 60.0, kRight = 160.0, kTop = 20.0, kBottom = 50.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : strategies) {
    for (const auto& c : s.curve) {
      x_min = std::min(x_min, c.clicks);
      x_max = std::max(x_max, c.clicks);
    }
  }
  if (!(x_max > x_min)) {
    x_min = std::isfinite(x_min) ? x_min - 1.0 : 0.0;
    x_max = x_min + 2.0;
  }
  auto px = [&](double clicks) { return kLeft + (clicks - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double miou) { return kTop + (1.0 - std::clamp(miou, 0.0, 1.0)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py(v) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">annotated superpixels (clicks)</text>\n";
  svg << "<text x=\"14\" y=\"" << kTop + plot_h / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << kTop + plot_h / 2 << ")\">test mIoU</text>\n";

  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const auto& s = strategies[i];
    const char* color = kPalette[i % std::size(kPalette)];
    if (s.curve.empty()) continue;

    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.15\" points=\"";
    for (const auto& c : s.curve) svg << fmt(px(c.clicks)) << "," << fmt(py(c.miou_mean + c.miou_std)) << " ";
    for (auto it = s.curve.rbegin(); it != s.curve.rend(); ++it) {
      svg << fmt(px(it->clicks)) << "," << fmt(py(it->miou_mean - it->miou_std)) << " ";
    }
    svg << "\"/>\n";

    svg << "<path class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" d=\"";
    for (std::size_t k = 0; k < s.curve.size(); ++k) {
      svg << (k == 0 ? "M" : " L") << fmt(px(s.curve[k].clicks)) << " " << fmt(py(s.curve[k].miou_mean));
    }
    svg << "\"/>\n";

    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << kLeft + plot_w + 32 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w + 38 << "\" y=\"" << ly << "\" font-size=\"11\">"
        << escape_xml(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<StrategySummary> write_report(std::span<const std::filesystem::path> inputs,
                                          const std::filesystem::path& out) {
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "report needs at least one input");
  std::vector<StrategySummary> merged;
  for (const auto& dir : inputs) {
    nlohmann::json summary;
    try {
      summary = nlohmann::json::parse(io::read_text(dir / "summary.json"));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, (dir / "summary.json").string() + ": " + e.what());
    }
    const auto& list = summary.at("strategies");
    if (list.size() != 1) {
      throw Error(ErrorKind::Format,
                  dir.string() + " is not a single-strategy run directory");
    }
    const auto& entry = list.at(0);
    auto records = parse_runs_csv(io::read_text(dir / "runs.csv"));
    merged.push_back(summarize(entry.at("label").get<std::string>(), entry.at("config"),
                               entry.at("reference_miou").get<double>(), std::move(records)));
  }

  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out.string() + ": " + ec.message());

  std::string csv = std::string("strategy,") + kRunsCsvHeader + "\n";
  for (const auto& s : merged) {
    const std::string body = format_runs_csv(s.records);
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) csv += s.label + "," + line + "\n";
  }
  io::write_text(out / "runs_merged.csv", csv);
  io::write_text(out / "summary.json", dump_summary(summary_document(merged)));
  io::write_text(out / "curves.svg", render_curves_svg(merged));
  return merged;
}

}  // namespace oreal
