#include "hiersynth/pipeline.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

namespace hiersynth {

namespace {

std::vector<double> to_std(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& record) {
  std::ostringstream out;
  out << std::setprecision(12);
  const Eigen::Index n = record.samples.empty() ? 3 : record.samples.front().z.size();
  Eigen::Index p = 2;
  for (const auto& s : record.samples)
    if (s.u.size() > 0) p = s.u.size();
  out << "t";
  if (n == 3 && p == 2) {
    out << ",x,y,theta,v,omega";
  } else {
    for (Eigen::Index i = 0; i < n; ++i) out << ",z" << i;
    for (Eigen::Index i = 0; i < p; ++i) out << ",u" << i;
  }
  out << ",mode,plan,step\n";
  for (const auto& s : record.samples) {
    out << s.t;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << s.z[i];
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << (i < s.u.size() ? s.u[i] : 0.0);
    out << ',' << s.mode << ',' << s.plan << ',' << s.step << '\n';
  }
  return out.str();
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path) {
  write_text(trajectory_csv(record), path);
}

std::string controller_json(const PlanController& controller) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["pair"] = {controller.pair.first, controller.pair.second};
  ordered_json plan = ordered_json::array();
  const Abstraction* abs = controller.abstraction.get();
  for (std::size_t c : controller.plan.cells) {
    ordered_json cell{{"cell", c}};
    if (abs) cell["index"] = abs->store().partition().multi_index(c);
    plan.push_back(cell);
  }
  doc["plan"] = plan;
  if (!abs) return doc.dump(2) + "\n";

  const AbstractionConfig& cfg = abs->config();
  doc["tau"] = cfg.tau;
  doc["projection_2d"] = cfg.projection_2d;
  ordered_json inputs = ordered_json::array();
  for (const auto& u : cfg.inputs) inputs.push_back(to_std(u));
  doc["inputs"] = inputs;
  doc["stats"] = {{"iterations", controller.stats.iterations},
                  {"splits_per_step", controller.stats.splits_per_step},
                  {"leaves", controller.stats.leaves},
                  {"transitions", controller.stats.transitions}};
  ordered_json steps = ordered_json::array();
  for (std::size_t k = 0; k < abs->steps(); ++k) {
    ordered_json leaves = ordered_json::array();
    for (LeafId l : abs->store().leaves(controller.plan.cells[k])) {
      const BoxXd& b = abs->store().box(l);
      const bool valid = abs->is_valid(l);
      ordered_json leaf{{"id", l}, {"lo", to_std(b.lo())}, {"hi", to_std(b.hi())}, {"valid", valid}};
      const int input = valid ? abs->input_of(l) : -1;
      leaf["input"] = input >= 0 ? ordered_json(input) : ordered_json(nullptr);
      leaves.push_back(leaf);
    }
    steps.push_back({{"step", k}, {"cell", controller.plan.cells[k]}, {"leaves", leaves}});
  }
  doc["steps"] = steps;
  return doc.dump(2) + "\n";
}

std::string workspace_svg(const Workspace& ws, const std::vector<const PlanController*>& controllers,
                          const std::vector<const TrajectoryRecord*>& trajectories) {
  const GridPartition& g = ws.partition();
  const BoxXd& w = g.workspace();
  const bool planar = g.dim() >= 2;
  const double width = w.hi(0) - w.lo(0);
  const double height = planar ? w.hi(1) - w.lo(1) : g.cell_size()[0];
  const double scale = 800.0 / width;
  const double margin = 10.0;
  auto px = [&](double x) { return margin + (x - w.lo(0)) * scale; };
  auto py = [&](double y) { return margin + ((planar ? w.hi(1) : height) - y) * scale; };
  auto rect = [&](std::ostringstream& out, double x0, double y0, double x1, double y1, const std::string& style) {
    out << "<rect x=\"" << px(x0) << "\" y=\"" << py(y1) << "\" width=\"" << (x1 - x0) * scale << "\" height=\""
        << (y1 - y0) * scale << "\" " << style << "/>\n";
  };
  auto cell_rect = [&](std::ostringstream& out, std::size_t c, const std::string& style) {
    const BoxXd b = g.cell_box(c);
    rect(out, b.lo(0), planar ? b.lo(1) : 0.0, b.hi(0), planar ? b.hi(1) : height, style);
  };

  std::ostringstream out;
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * margin + width * scale << "\" height=\""
      << 2 * margin + height * scale << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << "<g id=\"valid\">\n";
  for (const PlanController* pc : controllers) {
    if (!pc || !pc->abstraction) continue;
    const Abstraction& abs = *pc->abstraction;
    std::set<std::tuple<double, double, double, double>> drawn;
    for (std::size_t k = 0; k + 1 < abs.steps(); ++k)
      for (LeafId l : abs.valid_set(k)) {
        const BoxXd& b = abs.store().box(l);
        const auto key = std::make_tuple(b.lo(0), planar ? b.lo(1) : 0.0, b.hi(0), planar ? b.hi(1) : height);
        if (!drawn.insert(key).second) continue;
        rect(out, std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
             "fill=\"red\" fill-opacity=\"0.25\" stroke=\"black\" stroke-width=\"0.2\"");
      }
  }
  out << "</g>\n";

  out << "<g id=\"grid\" stroke=\"gray\" stroke-width=\"0.5\">\n";
  for (int i = 0; i <= g.counts()[0]; ++i)
    out << "<line x1=\"" << px(g.boundary(0, i)) << "\" y1=\"" << py(planar ? w.lo(1) : 0.0) << "\" x2=\""
        << px(g.boundary(0, i)) << "\" y2=\"" << py(planar ? w.hi(1) : height) << "\"/>\n";
  const int rows = planar ? g.counts()[1] : 1;
  for (int j = 0; j <= rows; ++j) {
    const double y = planar ? g.boundary(1, j) : j * height;
    out << "<line x1=\"" << px(w.lo(0)) << "\" y1=\"" << py(y) << "\" x2=\"" << px(w.hi(0)) << "\" y2=\"" << py(y)
        << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g id=\"obstacles\">\n";
  for (std::size_t c : ws.obstacles()) cell_rect(out, c, "fill=\"black\"");
  out << "</g>\n<g id=\"regions\">\n";
  for (const auto& [name, c] : ws.rois()) {
    cell_rect(out, c, "fill=\"blue\" fill-opacity=\"0.6\"");
    const BoxXd b = g.cell_box(c);
    const double cy = planar ? 0.5 * (b.lo(1) + b.hi(1)) : 0.5 * height;
    out << "<text x=\"" << px(0.5 * (b.lo(0) + b.hi(0))) << "\" y=\"" << py(cy)
        << "\" font-size=\"12\" text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"white\">" << name
        << "</text>\n";
  }
  out << "</g>\n";

  static const char* palette[] = {"green", "darkorange", "purple", "teal", "crimson"};
  out << "<g id=\"trajectories\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const TrajectoryRecord* tr = trajectories[i];
    if (!tr || tr->dense_z.empty()) continue;
    out << "<polyline stroke=\"" << palette[i % 5] << "\" points=\"";
    for (const auto& z : tr->dense_z) out << px(z[0]) << ',' << py(planar ? z[1] : 0.5 * height) << ' ';
    out << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace hiersynth
