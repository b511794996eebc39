#include "swirl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace swirl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

// Reads the keys of one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(where() + "expected an object");
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(where(key) + "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(where(key) + "must be finite");
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(where(key) + "expected an integer");
      if (std::is_unsigned_v<Int> && v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else {
        const auto x = v->get<std::int64_t>();
        if (std::is_unsigned_v<Int> && x < 0) fail(where(key) + "must be >= 0");
        out = static_cast<Int>(x);
      }
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(where(key) + "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(where(key) + "expected a string");
      out = v->get<std::string>();
    }
  }

  void array5(const char* key, std::array<double, 5>& out) {
    const json* v = take(key);
    if (!v) fail(where(key) + "missing");
    if (!v->is_array() || v->size() != 5) fail(where(key) + "expected 5 numbers");
    for (std::size_t k = 0; k < 5; ++k) {
      if (!(*v)[k].is_number()) fail(where(key) + "expected 5 numbers");
      out[k] = (*v)[k].get<double>();
    }
  }

  const json* child(const char* key) { return take(key); }
  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown key '" + path(it.key().c_str()) + "'");
    }
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string where(const char* key = nullptr) const {
    return "'" + (key ? path(key) : path_) + "': ";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void section(Section& parent, const char* key, F&& read) {
  if (const json* v = parent.child(key)) {
    Section s(*v, parent.path(key));
    read(s);
    s.finish();
  }
}

const char* propagation_name(Propagation p) {
  return p == Propagation::Trace ? "trace" : "bisection";
}

}  // namespace

bool FitConfig::operator==(const FitConfig& o) const {
  if (bounds.has_value() != o.bounds.has_value()) return false;
  if (bounds && (bounds->lower != o.bounds->lower || bounds->upper != o.bounds->upper)) {
    return false;
  }
  return restarts == o.restarts && max_iter == o.max_iter && jitter == o.jitter;
}

void RunConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(what);
  };
  try {
    SeparableVortex{model};
    domain.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  check(nr >= 3, "'grid.nr' must be >= 3");
  check(nz >= 3, "'grid.nz' must be >= 3");
  check(solver.rk_step > 0.0, "'solver.rk_step' must be > 0");
  check(solver.bisect_tol > 0.0, "'solver.bisect_tol' must be > 0");
  check(solver.level_tol > 0.0, "'solver.level_tol' must be > 0");
  check(solver.quadrature_n >= 2, "'solver.quadrature_n' must be >= 2");
  check(truth.inflow_speed >= 0.0, "'truth.inflow_speed' must be >= 0");
  check(truth.circulation_fraction > 0.0, "'truth.circulation_fraction' must be > 0");
  check(noise.sigma >= 0.0, "'noise.sigma' must be >= 0");
  check(noise.velocity_scale > 0.0, "'noise.velocity_scale' must be > 0");
  check(noise.members >= 2, "'noise.members' must be >= 2");
  check(noise.obs_nr >= 3, "'noise.obs_nr' must be >= 3");
  check(noise.obs_nz >= 3, "'noise.obs_nz' must be >= 3");
  check(fit.restarts >= 1, "'fit.restarts' must be >= 1");
  check(fit.max_iter >= 1, "'fit.max_iter' must be >= 1");
  check(fit.jitter >= 0.0, "'fit.jitter' must be >= 0");
  if (fit.bounds) {
    for (std::size_t k = 0; k < 5; ++k) {
      check(fit.bounds->lower[k] < fit.bounds->upper[k], "'fit.bounds' need lower < upper");
    }
    check(fit.bounds->lower[0] > 0.0 && fit.bounds->lower[2] > 0.0 && fit.bounds->lower[4] > 0.0,
          "'fit.bounds' v_c, r_c and z_c must be bounded away from 0");
    check(fit.bounds->lower[1] > 1.0 && fit.bounds->lower[3] > 1.0,
          "'fit.bounds' exponents must be bounded above 1");
  }
  check(!output.dir.empty(), "'output.dir' must not be empty");
}

RetrieveOptions RunConfig::retrieve_options() const {
  RetrieveOptions o;
  o.propagation = solver.propagation;
  o.bisect_tol = solver.bisect_tol;
  o.rk_step = solver.rk_step;
  o.level_tol = solver.level_tol;
  return o;
}

TwinSettings RunConfig::twin_settings() const {
  TwinSettings s;
  s.h = domain.h;
  s.h_s = domain.h_s;
  s.sigma = noise.sigma / noise.velocity_scale;
  s.seed = noise.seed;
  s.grid = grid();
  s.obs_grid = obs_grid();
  s.quadrature_n = solver.quadrature_n;
  s.retrieve = retrieve_options();
  s.fit.restarts = fit.restarts;
  s.fit.max_iter = fit.max_iter;
  s.fit.jitter = fit.jitter;
  s.bounds = fit.bounds;
  return s;
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  section(top, "model", [&](Section& s) {
    s.number("v_c", c.model.v_c);
    s.number("n_r", c.model.n_r);
    s.number("r_c", c.model.r_c);
    s.number("n_z", c.model.n_z);
    s.number("z_c", c.model.z_c);
  });
  section(top, "domain", [&](Section& s) {
    s.number("R", c.domain.R);
    s.number("H", c.domain.H);
    s.number("h", c.domain.h);
    s.number("h_s", c.domain.h_s);
    s.number("nu", c.domain.nu);
  });
  section(top, "grid", [&](Section& s) {
    s.integer("nr", c.nr);
    s.integer("nz", c.nz);
  });
  section(top, "solver", [&](Section& s) {
    s.number("rk_step", c.solver.rk_step);
    s.number("bisect_tol", c.solver.bisect_tol);
    s.number("level_tol", c.solver.level_tol);
    s.integer("quadrature_n", c.solver.quadrature_n);
    std::string prop = propagation_name(c.solver.propagation);
    s.string("propagation", prop);
    if (prop == "bisection") {
      c.solver.propagation = Propagation::Bisection;
    } else if (prop == "trace") {
      c.solver.propagation = Propagation::Trace;
    } else {
      fail("'solver.propagation' must be \"bisection\" or \"trace\"");
    }
  });
  section(top, "truth", [&](Section& s) {
    s.number("inflow_speed", c.truth.inflow_speed);
    s.number("circulation_fraction", c.truth.circulation_fraction);
  });
  section(top, "noise", [&](Section& s) {
    s.number("sigma", c.noise.sigma);
    s.number("velocity_scale", c.noise.velocity_scale);
    s.integer("seed", c.noise.seed);
    s.integer("members", c.noise.members);
    s.integer("obs_nr", c.noise.obs_nr);
    s.integer("obs_nz", c.noise.obs_nz);
  });
  section(top, "fit", [&](Section& s) {
    if (const json* b = s.child("bounds"); b && !b->is_null()) {
      Section bs(*b, s.path("bounds"));
      ParameterBounds pb;
      bs.array5("lower", pb.lower);
      bs.array5("upper", pb.upper);
      bs.finish();
      c.fit.bounds = pb;
    }
    s.integer("restarts", c.fit.restarts);
    s.integer("max_iter", c.fit.max_iter);
    s.number("jitter", c.fit.jitter);
  });
  section(top, "output", [&](Section& s) {
    s.string("dir", c.output.dir);
    s.boolean("member_fields", c.output.member_fields);
  });
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c, int indent) {
  json j;
  j["model"] = {{"v_c", c.model.v_c},
                {"n_r", c.model.n_r},
                {"r_c", c.model.r_c},
                {"n_z", c.model.n_z},
                {"z_c", c.model.z_c}};
  j["domain"] = {{"R", c.domain.R},
                 {"H", c.domain.H},
                 {"h", c.domain.h},
                 {"h_s", c.domain.h_s},
                 {"nu", c.domain.nu}};
  j["grid"] = {{"nr", c.nr}, {"nz", c.nz}};
  j["solver"] = {{"rk_step", c.solver.rk_step},
                 {"bisect_tol", c.solver.bisect_tol},
                 {"level_tol", c.solver.level_tol},
                 {"quadrature_n", c.solver.quadrature_n},
                 {"propagation", propagation_name(c.solver.propagation)}};
  j["truth"] = {{"inflow_speed", c.truth.inflow_speed},
                {"circulation_fraction", c.truth.circulation_fraction}};
  j["noise"] = {{"sigma", c.noise.sigma},
                {"velocity_scale", c.noise.velocity_scale},
                {"seed", c.noise.seed},
                {"members", c.noise.members},
                {"obs_nr", c.noise.obs_nr},
                {"obs_nz", c.noise.obs_nz}};
  json bounds = nullptr;
  if (c.fit.bounds) bounds = {{"lower", c.fit.bounds->lower}, {"upper", c.fit.bounds->upper}};
  j["fit"] = {{"bounds", bounds},
              {"restarts", c.fit.restarts},
              {"max_iter", c.fit.max_iter},
              {"jitter", c.fit.jitter}};
  j["output"] = {{"dir", c.output.dir}, {"member_fields", c.output.member_fields}};
  return j.dump(indent);
}

}  // namespace swirl
