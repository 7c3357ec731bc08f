#include "mvfbm/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mvfbm/error.hpp"

namespace mvfbm {

namespace {

std::string num(double v) { return fmt::format("{}", v); }

void meta(std::ostream& out, std::string_view key, std::string_view value) {
  out << "# " << key << '=' << value << '\n';
}

void meta(std::ostream& out, std::string_view key, double value) { meta(out, key, num(value)); }

void meta(std::ostream& out, std::string_view key, std::uint64_t value) { meta(out, key, std::to_string(value)); }

void header(std::ostream& out, std::string_view kind) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  meta(out, "kind", kind);
}

}  // namespace

void write_csv(const ConvergenceReport& report, std::ostream& out) {
  header(out, "convergence");
  meta(out, "model", report.model_name);
  meta(out, "hurst", report.hurst);
  meta(out, "horizon", report.horizon);
  meta(out, "particles", std::uint64_t{report.particles});
  meta(out, "replications", std::uint64_t{report.replications});
  meta(out, "reference_delta", report.reference_delta);
  meta(out, "seed", report.seed);
  meta(out, "sampler", report.sampler);
  meta(out, "reference_rms", report.reference_rms);
  meta(out, "exact", report.exact ? "true" : "false");
  if (report.fit) {
    meta(out, "slope", report.fit->slope);
    meta(out, "slope_stderr", report.fit->standard_error);
  } else {
    meta(out, "slope", "undefined");
  }
  out << "delta,rms_error\n";
  for (const auto& p : report.points) out << num(p.delta) << ',' << num(p.rms_error) << '\n';
}

void write_csv(const ChaosReport& report, std::ostream& out) {
  header(out, "chaos");
  meta(out, "model", report.model_name);
  meta(out, "hurst", report.hurst);
  meta(out, "theta", report.theta);
  meta(out, "steps", std::uint64_t{report.steps});
  meta(out, "horizon", report.horizon);
  meta(out, "replications", std::uint64_t{report.replications});
  meta(out, "reference_particles", std::uint64_t{report.reference_particles});
  meta(out, "seed", report.seed);
  meta(out, "estimator", report.estimator);
  meta(out, "non_increasing", report.non_increasing ? "true" : "false");
  out << "particles,distance,standard_error\n";
  for (const auto& p : report.points) {
    out << p.particles << ',' << num(p.distance) << ',' << num(p.standard_error) << '\n';
  }
}

void write_csv(const MomentReport& report, std::ostream& out) {
  header(out, "moments");
  meta(out, "model", report.model_name);
  meta(out, "hurst", report.hurst);
  meta(out, "q", report.q);
  meta(out, "particles", std::uint64_t{report.particles});
  meta(out, "replications", std::uint64_t{report.replications});
  meta(out, "seed", report.seed);
  meta(out, "pass", report.pass ? "true" : "false");
  out << "delta,max_moment,terminal_moment,terminal_standard_error,ratio\n";
  for (const auto& p : report.points) {
    out << num(p.delta) << ',' << num(p.max_moment) << ',' << num(p.terminal_moment) << ','
        << num(p.terminal_standard_error) << ',' << (p.ratio ? num(*p.ratio) : std::string("nan")) << '\n';
  }
}

void write_csv(const FbmCheckReport& report, std::ostream& out) {
  header(out, "fbm-check");
  meta(out, "hurst", report.hurst);
  meta(out, "steps", std::uint64_t{report.steps});
  meta(out, "horizon", report.horizon);
  meta(out, "paths", std::uint64_t{report.paths});
  meta(out, "sampler", report.sampler);
  meta(out, "seed", report.seed);
  meta(out, "max_abs_z", report.max_abs_z);
  out << "row,col,empirical,theoretical,standard_error,z\n";
  for (const auto& e : report.entries) {
    out << e.row << ',' << e.col << ',' << num(e.empirical) << ',' << num(e.theoretical) << ','
        << num(e.standard_error) << ',' << num(e.z) << '\n';
  }
}

std::string to_json(const ConvergenceReport& report) {
  nlohmann::ordered_json j;
  j["hurst"] = report.hurst;
  j["model"] = report.model_name;
  j["particles"] = report.particles;
  j["replications"] = report.replications;
  j["horizon"] = report.horizon;
  j["reference_delta"] = report.reference_delta;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : report.points) j["points"].push_back({{"delta", p.delta}, {"rms_error", p.rms_error}});
  j["slope"] = report.fit ? nlohmann::ordered_json(report.fit->slope) : nlohmann::ordered_json(nullptr);
  j["slope_stderr"] = report.fit ? nlohmann::ordered_json(report.fit->standard_error) : nlohmann::ordered_json(nullptr);
  j["exact"] = report.exact;
  j["reference_rms"] = report.reference_rms;
  j["seeds"] = {report.seed};
  j["sampler"] = report.sampler;
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2);
}

std::string to_json(const ChaosReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model_name;
  j["hurst"] = report.hurst;
  j["theta"] = report.theta;
  j["estimator"] = report.estimator;
  j["steps"] = report.steps;
  j["horizon"] = report.horizon;
  j["replications"] = report.replications;
  j["reference_particles"] = report.reference_particles;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"particles", p.particles}, {"distance", p.distance}, {"standard_error", p.standard_error}});
  }
  j["non_increasing"] = report.non_increasing;
  j["seed"] = report.seed;
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2);
}

std::string to_json(const MomentReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model_name;
  j["hurst"] = report.hurst;
  j["q"] = report.q;
  j["particles"] = report.particles;
  j["replications"] = report.replications;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"delta", p.delta},
                           {"max_moment", p.max_moment},
                           {"terminal_moment", p.terminal_moment},
                           {"terminal_standard_error", p.terminal_standard_error},
                           {"ratio", p.ratio ? nlohmann::ordered_json(*p.ratio) : nlohmann::ordered_json(nullptr)}});
  }
  j["pass"] = report.pass;
  j["seed"] = report.seed;
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2);
}

std::string to_json(const FbmCheckReport& report) {
  nlohmann::ordered_json j;
  j["hurst"] = report.hurst;
  j["steps"] = report.steps;
  j["horizon"] = report.horizon;
  j["paths"] = report.paths;
  j["sampler"] = report.sampler;
  j["seed"] = report.seed;
  j["max_abs_z"] = report.max_abs_z;
  j["entries"] = report.entries.size();
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2);
}

void write_svg(const ConvergenceReport& report, std::ostream& out) {
  constexpr double kWidth = 640, kHeight = 480, kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;
  std::vector<double> xs, ys;
  for (const auto& p : report.points) {
    if (p.rms_error > 0.0) {
      xs.push_back(std::log2(p.delta));
      ys.push_back(std::log2(p.rms_error));
    }
  }
  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                     "font-family=\"sans-serif\" font-size=\"12\">\n",
                     kWidth, kHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{} H={} N={} M={}</text>\n", kWidth / 2,
                     report.model_name, report.hurst, report.particles, report.replications);
  if (xs.empty()) {
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">scheme exact; nothing to plot</text>\n",
                       kWidth / 2, kHeight / 2);
    out << "</svg>\n";
    return;
  }

  const double x0 = std::floor(*std::min_element(xs.begin(), xs.end()) - 0.5);
  const double x1 = std::ceil(*std::max_element(xs.begin(), xs.end()) + 0.5);
  // The reference line spans the x range, so include its extent in the y range.
  const double ref_y0 = ys.front() + report.hurst * (x0 - xs.front());
  const double ref_y1 = ys.front() + report.hurst * (x1 - xs.front());
  double y0 = std::min({*std::min_element(ys.begin(), ys.end()), ref_y0, ref_y1});
  double y1 = std::max({*std::max_element(ys.begin(), ys.end()), ref_y0, ref_y1});
  y0 = std::floor(y0 - 0.5);
  y1 = std::ceil(y1 + 0.5);

  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); };
  auto py = [&](double y) { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); };

  out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft,
                     kHeight - kBottom, kWidth - kRight);
  out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft,
                     kHeight - kBottom, kTop);
  for (double t = x0; t <= x1; t += 1.0) {
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">2^{}</text>\n", px(t),
                       kHeight - kBottom + 18, static_cast<int>(t));
  }
  const double ystep = std::max(1.0, std::ceil((y1 - y0) / 10.0));
  for (double t = y0; t <= y1; t += ystep) {
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">2^{}</text>\n", kLeft - 6, py(t) + 4,
                       static_cast<int>(t));
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">step size</text>\n", kWidth / 2, kHeight - 16);
  out << fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">"
                     "RMS terminal error</text>\n",
                     kHeight / 2);

  out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"red\" "
                     "stroke-dasharray=\"4 4\"/>\n",
                     px(x0), py(ref_y0), px(x1), py(ref_y1));
  if (report.fit) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    const double intercept = my - report.fit->slope * mx;
    out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"blue\"/>\n",
                       px(xs.front()), py(intercept + report.fit->slope * xs.front()), px(xs.back()),
                       py(intercept + report.fit->slope * xs.back()));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"4\" fill=\"blue\"/>\n", px(xs[i]), py(ys[i]));
  }
  const std::string fitted = report.fit ? fmt::format("fitted slope {:.3f}", report.fit->slope) : "no fit";
  out << fmt::format("<text x=\"{}\" y=\"{}\" fill=\"blue\">{}</text>\n", kLeft + 10, kTop + 14, fitted);
  out << fmt::format("<text x=\"{}\" y=\"{}\" fill=\"red\">reference slope H = {}</text>\n", kLeft + 10, kTop + 30,
                     report.hurst);
  out << "</svg>\n";
}

CsvDocument read_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV report");
  const std::string prefix = "# schema_version=";
  if (line.rfind(prefix, 0) != 0) throw ConfigError("CSV report does not start with a schema_version line");
  const std::string version = line.substr(prefix.size());
  if (version != std::to_string(kCsvSchemaVersion)) {
    throw ConfigError(fmt::format("unsupported CSV schema_version '{}'", version));
  }
  doc.metadata["schema_version"] = version;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("malformed metadata line '{}'", line));
      doc.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::stringstream fields(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(fields, cell, ',')) doc.columns.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("non-numeric CSV cell '{}'", cell));
      }
    }
    if (row.size() != doc.columns.size()) {
      throw ConfigError(fmt::format("CSV row has {} cells, header has {}", row.size(), doc.columns.size()));
    }
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

}  // namespace mvfbm
