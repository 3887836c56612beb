#include "softrb/bench.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "softrb/io.hpp"

namespace softrb::bench {

using nlohmann::json;

std::string_view to_string(Scenario s) {
  return s == Scenario::Forward ? "forward" : "lqr";
}

Damping ExperimentConfig::damping_for(Scenario s) const {
  if (damping) return *damping;
  return s == Scenario::Forward ? Damping{0.0, 0.0} : Damping{0.0, 0.1};
}

void validate(const ExperimentConfig& c) {
  if (c.nx < 1 || c.ny < 1 || c.ny % 4 != 0) {
    throw NumericalError("config: need nx >= 1 and ny a positive multiple of 4");
  }
  fem::validate(c.material);
  if (!(c.solid_mass > 0)) throw NumericalError("config: solid mass must be positive");
  if (c.damping && (c.damping->alpha < 0 || c.damping->beta < 0)) {
    throw NumericalError("config: damping coefficients must be >= 0");
  }
  if (!(c.q_scale >= 0) || !(c.r_scale > 0)) {
    throw NumericalError("config: need q_scale >= 0 and r_scale > 0");
  }
  softrb::validate(c.forward_grid);
  softrb::validate(c.lqr_grid);
  if (!c.target_solid.allFinite() || !c.body_force.allFinite()) {
    throw NumericalError("config: target and body force must be finite");
  }
  if (c.basis_sizes.empty() && (!(c.energy > 0) || c.energy > 1)) {
    throw NumericalError("config: energy fraction must lie in (0, 1]");
  }
  for (Index n : c.basis_sizes) {
    if (n < 1) throw NumericalError("config: basis sizes must be positive");
  }
  if (c.timing_repetitions < 1) throw NumericalError("config: timing_repetitions must be >= 1");
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Eigen::Vector2d read_vec2(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw NumericalError("config: expected a 2-vector");
  return {v[0], v[1]};
}

void read_grid(const json& j, TimeGrid& g) {
  read_if(j, "final_time", g.final_time);
  read_if(j, "steps", g.steps);
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw NumericalError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    if (j.contains("mesh")) {
      read_if(j["mesh"], "nx", c.nx);
      read_if(j["mesh"], "ny", c.ny);
    }
    if (j.contains("material")) {
      read_if(j["material"], "lambda", c.material.lambda);
      read_if(j["material"], "mu", c.material.mu);
      read_if(j["material"], "rho", c.material.rho);
    }
    if (j.contains("solid")) read_if(j["solid"], "mass", c.solid_mass);
    if (j.contains("damping") && !j["damping"].is_null()) {
      Damping d;
      read_if(j["damping"], "alpha", d.alpha);
      read_if(j["damping"], "beta", d.beta);
      c.damping = d;
    }
    if (j.contains("weights")) {
      read_if(j["weights"], "q_scale", c.q_scale);
      read_if(j["weights"], "r_scale", c.r_scale);
    }
    if (j.contains("forward")) read_grid(j["forward"], c.forward_grid);
    if (j.contains("lqr")) read_grid(j["lqr"], c.lqr_grid);
    if (j.contains("target_solid")) c.target_solid = read_vec2(j["target_solid"]);
    if (j.contains("body_force")) c.body_force = read_vec2(j["body_force"]);
    read_if(j, "methods", c.methods);
    read_if(j, "basis_sizes", c.basis_sizes);
    read_if(j, "energy", c.energy);
    read_if(j, "seed", c.seed);
    read_if(j, "timing_repetitions", c.timing_repetitions);
    read_if(j, "record_timings", c.record_timings);
    read_if(j, "closed_loop_check", c.closed_loop_check);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw NumericalError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["mesh"] = {{"nx", c.nx}, {"ny", c.ny}};
  j["material"] = {{"lambda", c.material.lambda},
                   {"mu", c.material.mu},
                   {"rho", c.material.rho}};
  j["solid"] = {{"mass", c.solid_mass}};
  if (c.damping) {
    j["damping"] = {{"alpha", c.damping->alpha}, {"beta", c.damping->beta}};
  } else {
    j["damping"] = nullptr;
  }
  j["weights"] = {{"q_scale", c.q_scale}, {"r_scale", c.r_scale}};
  j["forward"] = {{"final_time", c.forward_grid.final_time},
                  {"steps", c.forward_grid.steps}};
  j["lqr"] = {{"final_time", c.lqr_grid.final_time}, {"steps", c.lqr_grid.steps}};
  j["target_solid"] = {c.target_solid(0), c.target_solid(1)};
  j["body_force"] = {c.body_force(0), c.body_force(1)};
  j["methods"] = c.methods;
  j["basis_sizes"] = c.basis_sizes;
  j["energy"] = c.energy;
  j["seed"] = c.seed;
  j["timing_repetitions"] = c.timing_repetitions;
  j["record_timings"] = c.record_timings;
  j["closed_loop_check"] = c.closed_loop_check;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2);
}

DeskModel build_model(const ExperimentConfig& config, Scenario scenario) {
  validate(config);
  DeskModel m;
  m.mesh = fem::build_mesh(config.nx, config.ny);
  m.assembly = fem::assemble(m.mesh, config.material);
  Vector load;
  if (config.body_force.squaredNorm() > 0) {
    load = fem::body_force(m.mesh, config.body_force);
  }
  SolidParams solid;
  solid.mass = config.solid_mass;
  m.coupled = build_coupled(m.assembly, solid, config.damping_for(scenario), load);
  m.observation_node =
      fem::nearest_free_node(m.mesh, 0.5 * m.mesh.width, 0.0);
  m.system = to_first_order(m.coupled, m.observation_node);
  m.target = equilibrium_for_target(m.coupled, config.target_solid);
  return m;
}

CostWeights default_weights(const ExperimentConfig& config,
                            const FirstOrderSystem& sys) {
  return {config.q_scale * Matrix::Identity(sys.outputs(), sys.outputs()),
          config.r_scale * Matrix::Identity(sys.inputs(), sys.inputs())};
}

namespace {

std::vector<std::string> scenario_methods(const ExperimentConfig& c,
                                          Scenario s) {
  if (!c.methods.empty()) return c.methods;
  std::vector<std::string> out;
  if (s == Scenario::Forward) {
    for (ForwardMethod m : kAllForwardMethods) out.emplace_back(to_string(m));
  } else {
    for (RbAreMethod m : kAllRbAreMethods) out.emplace_back(to_string(m));
  }
  return out;
}

double timed(const ExperimentConfig& c, double seconds) {
  return c.record_timings ? seconds : 0.0;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Reduced Riccati residuals above this are flagged in the status column.
constexpr double kResidualTolerance = 1e-8;

}  // namespace

ForwardRun run_forward(const ExperimentConfig& config) {
  return run_forward(config, build_model(config, Scenario::Forward));
}

ForwardRun run_forward(const ExperimentConfig& config, const DeskModel& model) {
  const FirstOrderSystem& sys = model.system;
  const InputFunction input = quintic_solid_input(
      model.coupled, config.target_solid, config.forward_grid.final_time);

  ForwardRun run;
  const double t_fom = median_seconds(config.timing_repetitions, [&] {
    run.fom = implicit_midpoint(sys, input, config.forward_grid);
  });
  run.t_fom = timed(config, t_fom);
  run.snapshots = snapshots_from(run.fom, sys.layout);
  run.singular_values = singular_values(run.snapshots.X);

  for (const std::string& tag : scenario_methods(config, Scenario::Forward)) {
    std::vector<std::optional<Index>> sizes;
    if (config.basis_sizes.empty()) {
      sizes.emplace_back(std::nullopt);
    } else {
      for (Index n : config.basis_sizes) sizes.emplace_back(n);
    }
    for (const auto& size : sizes) {
      RunRecord rec;
      rec.scenario = Scenario::Forward;
      rec.method = tag;
      rec.N = size.value_or(0);
      rec.t_fom = run.t_fom;
      try {
        const ForwardMethod method = parse_forward_method(tag);
        ReducedBasis basis;
        ReducedForwardModel rom;
        const double offline = median_seconds(1, [&] {
          basis = size ? build_forward_basis(method, run.snapshots, *size)
                       : build_forward_basis_by_energy(method, run.snapshots,
                                                       config.energy);
          rom = galerkin_project(sys, basis.V);
        });
        rec.N = basis.dimension();
        Trajectory reduced;
        const double online = median_seconds(config.timing_repetitions, [&] {
          reduced = simulate_reduced(rom, input, config.forward_grid);
        });
        const Matrix X_r = reduced.states.rightCols(reduced.states.cols() - 1);
        rec.error = reconstruct_and_error(basis.V, X_r, run.snapshots.X).error;
        rec.t_rom_offline = timed(config, offline);
        rec.t_rom_online = timed(config, online);
        rec.speedup = rec.t_rom_online > 0 ? rec.t_fom / rec.t_rom_online : 0.0;
        rec.residual = is_symplectic(method)
                           ? symplecticity_residual(basis, sys.layout)
                           : orthonormality_residual(basis.V);
        rec.stability_margin = kNaN;
        if (!std::isfinite(rec.error)) rec.status = "diverged";
      } catch (const NumericalError& e) {
        rec.error = kNaN;
        rec.status = std::string("failed: ") + e.what();
      }
      run.records.push_back(std::move(rec));
    }
  }
  return run;
}

LqrRun run_lqr(const ExperimentConfig& config, bool simulate_fom) {
  return run_lqr(config, build_model(config, Scenario::Lqr), simulate_fom);
}

LqrRun run_lqr(const ExperimentConfig& config, const DeskModel& model,
               bool simulate_fom) {
  const FirstOrderSystem& sys = model.system;
  const CostWeights w = default_weights(config, sys);

  LqrRun run;
  const double t_fom = median_seconds(config.timing_repetitions,
                                      [&] { run.fom = solve_gare_dense(sys, w); });
  run.t_fom = timed(config, t_fom);
  if (simulate_fom) {
    run.fom_closed_loop =
        closed_loop_simulate(sys, run.fom.gain, model.target, config.lqr_grid);
  }

  std::vector<Index> sizes = config.basis_sizes;
  if (sizes.empty()) {
    sizes.push_back(pod_energy_rank(singular_values(run.fom.P), config.energy));
  }

  for (const std::string& tag : scenario_methods(config, Scenario::Lqr)) {
    for (Index size : sizes) {
      RunRecord rec;
      rec.scenario = Scenario::Lqr;
      rec.method = tag;
      rec.N = size;
      rec.t_fom = run.t_fom;
      rec.stability_margin = kNaN;
      try {
        const RbAreMethod method = parse_rb_are_method(tag);
        Index n = size;
        if (method == RbAreMethod::PodDecomposedP &&
            (n - sys.layout.solid_size()) % 2 != 0 && config.basis_sizes.empty()) {
          ++n;
        }
        RbAreBasis basis;
        const double offline = median_seconds(1, [&] {
          basis = build_rb_are_basis(method, run.fom.P, sys, n);
        });
        rec.N = basis.dimension();
        ReducedAre reduced;
        const double online = median_seconds(config.timing_repetitions, [&] {
          reduced = solve_reduced_are(sys, w, basis.V);
        });
        rec.error = rb_are_error(run.fom.P, reduced.P_hat);
        rec.residual = reduced.reduced.residual;
        rec.t_rom_offline = timed(config, offline);
        rec.t_rom_online = timed(config, online);
        rec.speedup = rec.t_rom_online > 0 ? rec.t_fom / rec.t_rom_online : 0.0;
        if (config.closed_loop_check) {
          rec.stability_margin =
              closed_loop_eigenvalues(sys.E, sys.A, sys.B, reduced.gain)
                  .real()
                  .maxCoeff();
        }
        auto flag = [&](const char* what) {
          rec.status = rec.status == "ok" ? what : rec.status + ";" + what;
        };
        if (rec.error > 1.0) flag("error>100%");
        if (!(rec.residual <= kResidualTolerance)) flag("residual");
        if (config.closed_loop_check && !(rec.stability_margin < 0)) {
          flag("unstable");
        }
      } catch (const NumericalError& e) {
        rec.error = kNaN;
        rec.status = std::string("failed: ") + e.what();
      }
      run.records.push_back(std::move(rec));
    }
  }
  return run;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

constexpr const char* kCsvHeader =
    "scenario,method,N_V,error,t_fom_s,t_rom_offline_s,t_rom_online_s,speedup,"
    "residual,stability_margin,status";

}  // namespace

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot open '" + path.string() + "' for writing");
  out << kCsvHeader << '\n' << std::setprecision(10);
  for (const RunRecord& r : records) {
    out << to_string(r.scenario) << ',' << csv_escape(r.method) << ',' << r.N
        << ',' << r.error << ',' << r.t_fom << ',' << r.t_rom_offline << ','
        << r.t_rom_online << ',' << r.speedup << ',' << r.residual << ','
        << r.stability_margin << ',' << csv_escape(r.status) << '\n';
  }
}

std::vector<RunRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw io::IoError("'" + path.string() + "' is not a results CSV");
  }
  auto number = [](const std::string& s) {
    if (s == "nan" || s == "-nan") return kNaN;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
  };
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) throw io::IoError("malformed results row: " + line);
    RunRecord r;
    r.scenario = f[0] == "lqr" ? Scenario::Lqr : Scenario::Forward;
    r.method = f[1];
    r.N = std::stol(f[2]);
    r.error = number(f[3]);
    r.t_fom = number(f[4]);
    r.t_rom_offline = number(f[5]);
    r.t_rom_online = number(f[6]);
    r.speedup = number(f[7]);
    r.residual = number(f[8]);
    r.stability_margin = number(f[9]);
    r.status = f[10];
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_error_plot(const std::vector<RunRecord>& records,
                              const std::string& title) {
  if (records.empty()) throw NumericalError("plot: no records");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<Index, double>>> series;
  for (const RunRecord& r : records) {
    if (!series.count(r.method)) order.push_back(r.method);
    auto& s = series[r.method];
    if (std::isfinite(r.error) && r.error >= 0) {
      s.emplace_back(r.N, std::max(r.error, 1e-16));
    }
  }
  Index n_min = std::numeric_limits<Index>::max(), n_max = 0;
  double lo = 0, hi = 0;
  bool any = false;
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end());
    for (const auto& [n, e] : pts) {
      n_min = std::min(n_min, n);
      n_max = std::max(n_max, n);
      const double le = std::log10(e);
      lo = any ? std::min(lo, le) : le;
      hi = any ? std::max(hi, le) : le;
      any = true;
    }
  }
  if (!any) {
    n_min = 0;
    n_max = 1;
    lo = -1;
    hi = 0;
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1;
  if (n_max <= n_min) n_max = n_min + 1;

  const double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double n) { return left + pw * (n - n_min) / double(n_max - n_min); };
  auto py = [&](double le) { return top + ph * (hi - le) / (hi - lo); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); ++d) {
    svg << "<line x1=\"" << left << "\" y1=\"" << py(d) << "\" x2=\""
        << left + pw << "\" y2=\"" << py(d)
        << "\" stroke=\"#dddddd\"/>\n<text x=\"" << left - 8 << "\" y=\""
        << py(d) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">1e" << d << "</text>\n";
  }
  const Index span = n_max - n_min;
  const Index tick = span <= 12 ? 1 : (span <= 30 ? 2 : span / 10);
  for (Index n = n_min; n <= n_max; n += tick) {
    svg << "<text x=\"" << px(n) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << n << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">N_V</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << top + ph / 2
      << ")\">relative error</text>\n";

  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& pts = series[order[i]];
    const char* color = colors[i % 6];
    if (pts.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [n, e] : pts) svg << px(n) << ',' << py(std::log10(e)) << ' ';
      svg << "\"/>\n";
    }
    for (const auto& [n, e] : pts) {
      svg << "<circle cx=\"" << px(n) << "\" cy=\"" << py(std::log10(e))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 18 * i;
    svg << "<g class=\"legend\"><line x1=\"" << left + pw + 12 << "\" y1=\""
        << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\""
        << left + pw + 38 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << order[i]
        << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& path,
               const std::vector<RunRecord>& records, const std::string& title) {
  const std::string svg = render_error_plot(records, title);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot open '" + path.string() + "' for writing");
  out << svg;
}

}  // namespace softrb::bench
