#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "swirl/characteristics.hpp"
#include "swirl/config.hpp"
#include "swirl/experiments.hpp"
#include "swirl/fit.hpp"
#include "swirl/io.hpp"
#include "swirl/retrieval.hpp"

namespace swirl::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string("stage '") + name + "': " + e.what());
  }
}

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::optional<double> moh;
  std::vector<double> moh_sweep;
  std::optional<int> members;
  std::string obs;
};

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.out) c.output.dir = *f.out;
  if (f.seed) c.noise.seed = *f.seed;
  if (f.sigma) c.noise.sigma = *f.sigma;
  if (f.moh) c.domain.h = *f.moh;
  if (f.members) c.noise.members = *f.members;
  c.validate();
  return c;
}

json to_json(const Norms& n) { return {{"l2", n.l2}, {"max", n.max}, {"count", n.count}}; }

json to_json(const Residuals& r) {
  return {{"continuity", {{"all", to_json(r.continuity_all)},
                          {"interior", to_json(r.continuity_interior)}}},
          {"momentum", {{"all", to_json(r.momentum_all)},
                        {"interior", to_json(r.momentum_interior)}}}};
}

json to_json(const ModelParams& p) {
  return {{"v_c", p.v_c}, {"n_r", p.n_r}, {"r_c", p.r_c}, {"n_z", p.n_z}, {"z_c", p.z_c}};
}

json to_json(const SurfaceScalars& s) {
  return {{"u_plus", s.u_plus}, {"w_plus", s.w_plus}, {"v_max", s.v_max}, {"nodes", s.nodes}};
}

json to_json(const ScalarSpread& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.std},
          {"covered", s.covered}};
}

json to_json(const FitResult& f) {
  return {{"params", to_json(f.model.params())},
          {"rms_misfit", f.rms_misfit},
          {"objective", f.objective},
          {"iterations", f.iterations},
          {"converged", f.converged}};
}

json void_counts(const VoidMap& m) {
  return {{"observable", m.count(CellFlag::Observable)},
          {"reachable", m.count(CellFlag::Reachable)},
          {"void", m.count(CellFlag::Void)},
          {"boundary_limited", m.count(CellFlag::BoundaryLimited)}};
}

class Writer {
 public:
  Writer(const RunConfig& c, std::ostream& log) : config_(c), log_(log), dir_(c.output.dir) {
    fs::create_directories(dir_);
  }

  template <class F>
  void csv(const std::string& name, F&& body, std::uint64_t seed) const {
    csv(name, std::forward<F>(body), config_, seed);
  }

  template <class F>
  void csv(const std::string& name, F&& body, const RunConfig& header_config,
           std::uint64_t seed) const {
    std::ostringstream os;
    body(os, provenance_header(header_config, seed));
    put(name, os.str());
  }

  void summary(const std::string& name, json j) const {
    j["config"] = json::parse(dump_config(config_));
    j["seed"] = config_.noise.seed;
    put(name, j.dump(2) + "\n");
  }

  void put(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    write_text_file(p, text);
    log_ << "wrote " << p.string() << '\n';
  }

  void config() const { put("config.json", dump_config(config_) + "\n"); }

 private:
  const RunConfig& config_;
  std::ostream& log_;
  fs::path dir_;
};

std::string sweep_name(const char* stem, double h) {
  return std::string(stem) + "_h" + format_number(h) + ".csv";
}

int cmd_fit(const RunConfig& c, const std::string& obs_path, std::ostream& out) {
  const auto obs = stage("read-observations", [&] { return read_observations(obs_path); });
  const FitResult fit = stage("fit", [&] {
    const ParameterBounds bounds =
        c.fit.bounds.value_or(ParameterBounds::defaults(obs, c.domain.R, c.domain.H));
    FitOptions fo;
    fo.restarts = c.fit.restarts;
    fo.max_iter = c.fit.max_iter;
    fo.jitter = c.fit.jitter;
    fo.seed = c.noise.seed;
    return fit_model(obs, c.model, bounds, fo);
  });
  Writer w(c, out);
  w.config();
  json j = to_json(fit);
  j["observations"] = obs.size();
  j["source"] = obs_path;
  w.summary("fit.json", j);
  out << "fit: rms misfit " << format_number(fit.rms_misfit)
      << (fit.converged ? ", converged\n" : ", NOT converged\n");
  return fit.converged ? kOk : kNotConverged;
}

int cmd_void_map(const RunConfig& c, std::ostream& out) {
  const SeparableVortex model = stage("model", [&] { return c.vortex(); });
  const VoidMap map =
      stage("classify", [&] { return classify(model, c.domain, c.grid(), c.solver.rk_step); });
  Writer w(c, out);
  w.config();
  w.csv("void.csv", [&](std::ostream& os, const std::string& hdr) { write_void_map(os, map, hdr); },
        c.noise.seed);
  w.csv("void_boundary.csv",
        [&](std::ostream& os, const std::string& hdr) {
          write_polyline(os, map.void_boundary, hdr);
        },
        c.noise.seed);
  w.summary("void_summary.json", {{"h", c.domain.h},
                                  {"h_o", map.h_o},
                                  {"gamma_threshold", map.gamma_threshold},
                                  {"counts", void_counts(map)}});
  return kOk;
}

int cmd_h0(const RunConfig& c, std::ostream& out) {
  const SeparableVortex model = stage("model", [&] { return c.vortex(); });
  const double h_o =
      stage("h0", [&] { return min_unreachable_height(model, c.domain, c.solver.level_tol); });
  Writer w(c, out);
  w.config();
  json j{{"h", c.domain.h}, {"h_o", h_o}};
  j["r_o"] = radial_circulation_peak(model, c.domain, c.domain.h);
  j["z_o"] = vertical_peak_height(model, c.domain);
  w.summary("h0.json", j);
  out << "h_o = " << format_number(h_o) << '\n';
  return kOk;
}

int cmd_retrieve(const RunConfig& c, std::ostream& out) {
  const SeparableVortex model = stage("model", [&] { return c.vortex(); });
  const TwinTruth truth = stage("truth", [&] { return generate_truth(model, c.domain, c.truth); });
  const VoidMap map =
      stage("classify", [&] { return classify(model, c.domain, c.grid(), c.solver.rk_step); });
  const MohBoundary boundary = stage("moh-boundary", [&] {
    return build_moh_boundary(model, c.domain, truth.u_at(c.domain.h), c.solver.quadrature_n);
  });
  RetrieveOptions ro = c.retrieve_options();
  ro.observed_u = truth.u_field();
  const RetrievedField field = stage("retrieve", [&] {
    return differentiate(retrieve(model, c.domain, boundary, map, ro));
  });
  const Residuals res = stage("residuals", [&] { return residuals(model, c.domain, field); });

  Writer w(c, out);
  w.config();
  w.csv("field.csv", [&](std::ostream& os, const std::string& hdr) { write_field(os, field, hdr); },
        c.noise.seed);
  w.csv("void.csv", [&](std::ostream& os, const std::string& hdr) { write_void_map(os, map, hdr); },
        c.noise.seed);
  w.summary("summary.json", {{"h", c.domain.h},
                             {"h_o", map.h_o},
                             {"void_count", map.count(CellFlag::Void)},
                             {"counts", void_counts(map)},
                             {"surface_nodes", surface_scalars(field, c.domain.h_s).nodes},
                             {"residuals", to_json(res)}});
  return kOk;
}

int cmd_twin(const RunConfig& c, const std::vector<double>& sweep, std::ostream& out) {
  const SeparableVortex model = stage("model", [&] { return c.vortex(); });
  const TwinTruth truth = stage("truth", [&] { return generate_truth(model, c.domain, c.truth); });
  std::vector<double> heights = sweep.empty() ? std::vector<double>{c.domain.h} : sweep;

  Writer w(c, out);
  w.config();
  json runs = json::array();
  bool converged = true;
  for (double h : heights) {
    RunConfig ch = c;
    ch.domain.h = h;
    const TwinSettings s = ch.twin_settings();
    const TwinOutcome o = stage("twin", [&] { return run_twin(truth, s); });
    converged = converged && o.fit.converged;
    const std::string name = sweep.empty() ? "field.csv" : sweep_name("field", h);
    w.csv(name, [&](std::ostream& os, const std::string& hdr) { write_field(os, o.field, hdr); },
          ch, c.noise.seed);
    runs.push_back({{"h", h},
                    {"field", name},
                    {"fit", to_json(o.fit)},
                    {"h_o", o.void_map.h_o},
                    {"void_count", o.void_map.count(CellFlag::Void)},
                    {"surface_nodes", o.surface_nodes},
                    {"psi_rel_error", o.psi_rel_error},
                    {"u_rel_error", o.u_rel_error},
                    {"w_rel_error", o.w_rel_error},
                    {"scalars", to_json(o.scalars)},
                    {"truth_scalars", to_json(truth_scalars(truth, s))},
                    {"residuals", to_json(o.residuals)}});
    out << "twin h=" << format_number(h) << ": surface nodes " << o.surface_nodes
        << ", max relative psi error " << format_number(o.psi_rel_error) << '\n';
  }
  w.summary("summary.json", {{"sigma", c.noise.sigma},
                             {"sigma_model", c.noise.sigma / c.noise.velocity_scale},
                             {"runs", runs}});
  return converged ? kOk : kNotConverged;
}

int cmd_ensemble(const RunConfig& c, std::ostream& out) {
  const SeparableVortex model = stage("model", [&] { return c.vortex(); });
  const TwinTruth truth = stage("truth", [&] { return generate_truth(model, c.domain, c.truth); });
  Writer w(c, out);
  w.config();
  MemberCallback on_member;
  if (c.output.member_fields) {
    on_member = [&](const EnsembleMember& m, const TwinOutcome& o) {
      std::ostringstream os;
      write_field(os, o.field, provenance_header(c, m.seed));
      write_text_file(fs::path(c.output.dir) / "members" /
                          ("member_" + std::to_string(m.seed) + ".csv"),
                      os.str());
    };
  }
  const EnsembleResult e = stage("ensemble", [&] {
    return run_ensemble(truth, c.twin_settings(), c.noise.members, c.noise.seed, on_member);
  });
  json members = json::array();
  for (const EnsembleMember& m : e.members) {
    json j{{"seed", m.seed}, {"ok", m.ok}};
    if (m.ok) {
      j["params"] = to_json(m.params);
      j["rms_misfit"] = m.rms_misfit;
      j["scalars"] = to_json(m.scalars);
    } else {
      j["error"] = m.error;
    }
    members.push_back(j);
  }
  w.summary("ensemble.json",
            {{"sigma", c.noise.sigma},
             {"sigma_model", e.sigma},
             {"h", e.h},
             {"h_s", e.h_s},
             {"members", c.noise.members},
             {"successes", e.successes},
             {"truth", to_json(e.truth)},
             {"spread",
              {{"u_plus", to_json(e.u_plus)},
               {"w_plus", to_json(e.w_plus)},
               {"v_max", to_json(e.v_max)}}},
             {"member_results", members}});
  out << "ensemble: " << e.successes << "/" << c.noise.members << " members succeeded\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieve low-level inflow and updraft in an axisymmetric vortex"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--sigma", f.sigma, "Observation noise (m/s)");
    sub->add_option("--moh", f.moh, "Minimum observable height h");
  };
  auto* fit = app.add_subcommand("fit", "Fit the tangential wind model to observations");
  common(fit);
  fit->add_option("--obs", f.obs, "Observations CSV (r,z,v,sigma)")->required();
  auto* retrieve = app.add_subcommand("retrieve", "Retrieve u, w below the MOH line");
  common(retrieve);
  auto* twin = app.add_subcommand("twin", "Identical-twin experiment");
  common(twin);
  twin->add_option("--moh-sweep", f.moh_sweep, "Comma-separated MOH values")->delimiter(',');
  auto* ensemble = app.add_subcommand("ensemble", "Noise ensemble of twin experiments");
  common(ensemble);
  ensemble->add_option("--members", f.members, "Ensemble size");
  auto* void_map = app.add_subcommand("void-map", "Classify grid nodes into observable, "
                                                  "reachable and void");
  common(void_map);
  auto* h0 = app.add_subcommand("h0", "Height below which every point is reachable");
  common(h0);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kError;
  }

  try {
    const RunConfig c = resolve(f);
    if (*fit) return cmd_fit(c, f.obs, out);
    if (*retrieve) return cmd_retrieve(c, out);
    if (*twin) return cmd_twin(c, f.moh_sweep, out);
    if (*ensemble) return cmd_ensemble(c, out);
    if (*void_map) return cmd_void_map(c, out);
    if (*h0) return cmd_h0(c, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace swirl::cli
