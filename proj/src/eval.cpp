#include "pcgrasp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pcgrasp/error.hpp"

namespace pcgrasp {

FrameResult FrameResult::make(std::size_t index, std::optional<Point3> target,
                              std::optional<Point3> truth, bool identity_correct,
                              double processing_ms) {
  FrameResult r;
  r.frame_index = index;
  r.target_found = target.has_value();
  r.target_centroid = target;
  r.truth_centroid = truth;
  if (target && truth) r.centroid_error = norm(*target - *truth);
  r.identity_correct = identity_correct;
  r.processing_ms = processing_ms;
  return r;
}

bool FrameResult::success(double threshold_mm) const {
  return target_found && identity_correct && centroid_error && *centroid_error <= threshold_mm;
}

FrameResult judge_target(std::size_t index, std::optional<Point3> selected,
                         const std::map<int, VisibleObject>& visible, int intended_id,
                         double processing_ms) {
  std::optional<Point3> truth;
  if (const auto it = visible.find(intended_id); it != visible.end()) truth = it->second.centroid;
  bool identity = false;
  if (selected && !visible.empty()) {
    int nearest = -1;
    double best = 0.0;
    for (const auto& [id, vis] : visible) {
      const double d = squared_distance(*selected, vis.centroid);
      if (nearest < 0 || d < best) {
        best = d;
        nearest = id;
      }
    }
    identity = nearest == intended_id;
  }
  return FrameResult::make(index, selected, truth, identity, processing_ms);
}

double rsr(std::span<const FrameResult> results, double threshold_mm) {
  if (results.empty()) throw ConfigError("rsr: no frames to evaluate");
  const auto ok = std::count_if(results.begin(), results.end(),
                                [&](const FrameResult& r) { return r.success(threshold_mm); });
  return static_cast<double>(ok) / static_cast<double>(results.size());
}

std::string format_fixed(const Ratio& value, int decimals) {
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const bool negative = value < 0;
  const Ratio mag = negative ? -value : value;
  // round(mag * scale) with halves away from zero
  const std::int64_t num = mag.numerator() * scale;
  const std::int64_t den = mag.denominator();
  const std::int64_t scaled = (2 * num + den) / (2 * den);
  std::string digits = std::to_string(scaled / scale);
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % scale);
    frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
    digits += "." + frac;
  }
  return (negative && scaled != 0 ? "-" : "") + digits;
}

namespace {

std::int64_t half_units(double score, const std::string& object, const char* what) {
  if (score == 0.0) return 0;
  if (score == 0.5) return 1;
  if (score == 1.0) return 2;
  throw SchemaError("trial for '" + object + "': " + what + " score " + std::to_string(score) +
                    " is not one of 0, 0.5, 1");
}

struct Tally {
  std::int64_t grasp = 0;  // half units
  std::int64_t maintain = 0;
  std::int64_t trials = 0;

  Ratio grasp_pct() const { return Ratio(grasp * 100, 2 * trials); }
  Ratio maintain_pct() const { return Ratio(maintain * 100, 2 * trials); }
  Ratio gas_pct() const { return (grasp_pct() + maintain_pct()) / 2; }
};

Ratio mean_gas(const std::map<std::string, Tally>& groups) {
  Ratio sum = 0;
  for (const auto& [_, t] : groups) sum += t.gas_pct();
  return sum / static_cast<std::int64_t>(groups.size());
}

}  // namespace

GasReport gas(std::span<const TrialRecord> trials, const std::map<std::string, GripType>& grip_map) {
  if (trials.empty()) throw SchemaError("gas: empty trial ledger");
  std::map<GripType, Tally> by_grip;
  std::map<std::string, Tally> by_object;
  std::map<std::string, Tally> by_participant;
  Tally all;
  bool any_participant = false;

  for (const auto& t : trials) {
    const auto it = grip_map.find(t.object_id);
    if (it == grip_map.end())
      throw SchemaError("gas: object '" + t.object_id + "' has no grip_map entry");
    const std::int64_t g = half_units(t.grasp, t.object_id, "grasp");
    const std::int64_t m = half_units(t.maintain, t.object_id, "maintain");
    for (Tally* tally : {&by_grip[it->second], &by_object[t.object_id], &all}) {
      tally->grasp += g;
      tally->maintain += m;
      ++tally->trials;
    }
    if (!t.participant.empty()) {
      any_participant = true;
      Tally& p = by_participant[t.participant];
      p.grasp += g;
      p.maintain += m;
      ++p.trials;
    }
  }

  GasReport report;
  Ratio sum = 0;
  for (const auto& [grip, tally] : by_grip) {
    report.per_grip.push_back(
        {grip, static_cast<std::size_t>(tally.trials), tally.grasp_pct(), tally.maintain_pct(), tally.gas_pct()});
    sum += tally.gas_pct();
  }
  report.overall_gas_pct = sum / static_cast<std::int64_t>(by_grip.size());
  report.by_trial_pct = all.gas_pct();
  report.by_object_pct = mean_gas(by_object);
  if (any_participant) report.by_participant_pct = mean_gas(by_participant);
  return report;
}

std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": unreadable file");
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t\r");
      const auto b = cell.find_last_not_of(" \t\r");
      cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty trial ledger");
  const auto header = split(line);
  const auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto obj = column("object_id");
  const auto grasp = column("grasp_score");
  const auto maintain = column("maintain_score");
  const auto participant = column("participant_id");
  if (!obj || !grasp || !maintain)
    throw SchemaError(path.string() +
                      ": header must contain object_id, grasp_score, maintain_score");

  std::vector<TrialRecord> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw SchemaError(path.string() + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    TrialRecord t;
    t.object_id = cells[*obj];
    try {
      std::size_t used = 0;
      t.grasp = std::stod(cells[*grasp], &used);
      if (used != cells[*grasp].size()) throw std::invalid_argument("trailing");
      t.maintain = std::stod(cells[*maintain], &used);
      if (used != cells[*maintain].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw SchemaError(path.string() + ": row " + std::to_string(row) + " has a non-numeric score");
    }
    if (participant) t.participant = cells[*participant];
    out.push_back(std::move(t));
  }
  return out;
}

std::map<std::string, GripType> load_grip_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": unreadable file");
  std::map<std::string, GripType> out;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw SchemaError(path.string() + ": grip map must be a JSON object");
    for (const auto& [key, value] : j.items()) out[key] = parse_grip_type(value.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return out;
}

void write_gas_csv(std::ostream& out, const GasReport& report) {
  out << "grip,trials,grasp_pct,maintain_pct,gas_pct\n";
  for (const auto& g : report.per_grip)
    out << to_string(g.grip) << ',' << g.trials << ',' << format_fixed(g.grasp_pct) << ','
        << format_fixed(g.maintain_pct) << ',' << format_fixed(g.gas_pct) << '\n';
  out << "overall_mean_of_grips,,,," << format_fixed(report.overall_gas_pct) << '\n';
  out << "overall_mean_of_trials,,,," << format_fixed(report.by_trial_pct) << '\n';
  out << "overall_mean_of_objects,,,," << format_fixed(report.by_object_pct) << '\n';
  if (report.by_participant_pct)
    out << "overall_mean_of_participants,,,," << format_fixed(*report.by_participant_pct) << '\n';
}

void write_gas_markdown(std::ostream& out, const GasReport& report) {
  out << "| GAS (%) |";
  for (const auto& g : report.per_grip) out << ' ' << to_string(g.grip) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < report.per_grip.size(); ++i) out << "---|";
  out << "\n| Grasping score |";
  for (const auto& g : report.per_grip) out << ' ' << format_fixed(g.grasp_pct) << " |";
  out << "\n| Maintaining score |";
  for (const auto& g : report.per_grip) out << ' ' << format_fixed(g.maintain_pct) << " |";
  out << "\n| GAS score |";
  for (const auto& g : report.per_grip) out << ' ' << format_fixed(g.gas_pct) << " |";
  out << "\n\n| Aggregation | GAS (%) |\n|---|---|\n";
  out << "| mean over grip types | " << format_fixed(report.overall_gas_pct) << " |\n";
  out << "| mean over trials | " << format_fixed(report.by_trial_pct) << " |\n";
  out << "| mean over objects | " << format_fixed(report.by_object_pct) << " |\n";
  if (report.by_participant_pct)
    out << "| mean over participants | " << format_fixed(*report.by_participant_pct) << " |\n";
}

FpsStats fps_statistics(std::span<const double> frame_ms) {
  FpsStats s;
  s.frame_ms.assign(frame_ms.begin(), frame_ms.end());
  if (frame_ms.empty()) return s;
  std::vector<double> fps;
  fps.reserve(frame_ms.size());
  for (double ms : frame_ms) fps.push_back(1000.0 / std::max(ms, 1e-9));
  s.mean_fps = std::accumulate(fps.begin(), fps.end(), 0.0) / static_cast<double>(fps.size());
  double ss = 0.0;
  for (double f : fps) ss += (f - s.mean_fps) * (f - s.mean_fps);
  s.std_fps = fps.size() > 1 ? std::sqrt(ss / static_cast<double>(fps.size() - 1)) : 0.0;
  std::sort(fps.begin(), fps.end());
  const std::size_t n = fps.size();
  s.median_fps = n % 2 ? fps[n / 2] : 0.5 * (fps[n / 2 - 1] + fps[n / 2]);
  return s;
}

FpsStats benchmark(const std::function<void(const DepthFrame&)>& process,
                   std::span<const DepthFrame> frames, std::size_t warmup) {
  if (warmup > frames.size() || frames.size() - warmup < 10)
    throw ConfigError("benchmark: insufficient frames (" + std::to_string(frames.size()) +
                      " frames, " + std::to_string(warmup) +
                      " warmup; at least 10 timed frames required)");
  for (std::size_t i = 0; i < warmup; ++i) process(frames[i]);
  std::vector<double> ms;
  ms.reserve(frames.size() - warmup);
  for (std::size_t i = warmup; i < frames.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    process(frames[i]);
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return fps_statistics(ms);
}

void write_throughput_markdown(std::ostream& out, const FpsStats& stats, bool single_thread) {
  char buf[256];
  out << "| Method | CPU processing (fps) | median fps | frames |\n|---|---|---|---|\n";
  std::snprintf(buf, sizeof buf, "| this build (%s) | %.2f ± %.2f | %.2f | %zu |\n",
                single_thread ? "single thread" : "multi thread", stats.mean_fps, stats.std_fps,
                stats.median_fps, stats.frame_ms.size());
  out << buf;
  std::snprintf(buf, sizeof buf, "| reference | %.2f ± %.2f | | |\n", kReferenceFps, kReferenceFpsStd);
  out << buf;
}

void write_rsr_report(std::ostream& csv, std::ostream& md, std::span<const FrameResult> results,
                      double threshold_mm) {
  csv << "frame,target_found,identity_correct,centroid_error_mm,success\n";
  for (const auto& r : results) {
    csv << r.frame_index << ',' << (r.target_found ? 1 : 0) << ',' << (r.identity_correct ? 1 : 0)
        << ',';
    if (r.centroid_error) csv << *r.centroid_error;
    csv << ',' << (r.success(threshold_mm) ? 1 : 0) << '\n';
  }
  const auto ok = std::count_if(results.begin(), results.end(),
                                [&](const FrameResult& r) { return r.success(threshold_mm); });
  const Ratio value(static_cast<std::int64_t>(ok) * 100, static_cast<std::int64_t>(results.size()));
  csv << "rsr_pct,,,," << format_fixed(value) << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.0f", threshold_mm);
  md << "| Keyframes | Successful | RSR (%) | Criterion |\n|---|---|---|---|\n";
  md << "| " << results.size() << " | " << ok << " | " << format_fixed(value)
     << " | target found, nearest ground-truth object is the intended one, centroid error <= "
     << buf << " mm |\n";
}

}  // namespace pcgrasp
