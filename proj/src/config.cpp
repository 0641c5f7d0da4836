#include "snls/config.hpp"

#include <fstream>
#include <sstream>

namespace snls {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config: " + path + ": " + message);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(path.empty() ? item.key() : path + "." + item.key(),
                     "unknown key");
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(join(path, key), "wrong type");
  }
}

void read_positive(const json& obj, const std::string& path, const char* key,
                   double& target) {
  read(obj, path, key, target);
  if (!(target > 0.0)) fail(join(path, key), "must be positive");
}

std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return std::to_string(line);
}

}  // namespace

ExperimentConfig parse_config_json(const json& j) {
  ExperimentConfig cfg;
  check_keys(j, "", {"grid", "noise", "solver", "cutoff", "initial", "run",
                     "ensemble", "fit", "probe", "output", "seed", "workers"});

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, "grid", {"dimension", "points", "length"});
    read(g, "grid", "dimension", cfg.grid.dim);
    read(g, "grid", "points", cfg.grid.n);
    read_positive(g, "grid", "length", cfg.grid.length);
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, "noise", {"symbol", "sigma", "s", "epsilon", "k_max"});
    if (n.contains("symbol")) {
      const std::string sym = n.at("symbol").get<std::string>();
      if (sym == "gaussian")
        cfg.noise.family = SymbolFamily::gaussian;
      else if (sym == "sobolev")
        cfg.noise.family = SymbolFamily::sobolev;
      else
        fail("noise.symbol", "must be \"gaussian\" or \"sobolev\"");
    }
    read(n, "noise", "sigma", cfg.noise.sigma);
    read(n, "noise", "s", cfg.noise.s);
    read(n, "noise", "epsilon", cfg.noise.epsilon);
    read(n, "noise", "k_max", cfg.noise.k_max);
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver", {"dt", "splitting", "p", "focusing", "truncation",
                             "radius", "dealias", "step_budget"});
    read_positive(s, "solver", "dt", cfg.solver.dt);
    if (s.contains("splitting")) {
      const std::string split = s.at("splitting").get<std::string>();
      if (split == "strang")
        cfg.solver.splitting = Splitting::strang;
      else if (split == "lie")
        cfg.solver.splitting = Splitting::lie;
      else
        fail("solver.splitting", "must be \"lie\" or \"strang\"");
    }
    read(s, "solver", "p", cfg.solver.p);
    if (s.contains("focusing"))
      cfg.solver.mu = s.at("focusing").get<bool>() ? +1 : -1;
    read(s, "solver", "truncation", cfg.solver.truncation);
    read(s, "solver", "radius", cfg.solver.radius);
    read(s, "solver", "dealias", cfg.solver.dealias);
    read(s, "solver", "step_budget", cfg.solver.step_budget);
  }

  if (j.contains("cutoff")) {
    const json& c = j.at("cutoff");
    check_keys(c, "cutoff", {"sharpness"});
    read(c, "cutoff", "sharpness", cfg.cutoff.sharpness);
  }

  if (j.contains("initial")) {
    const json& i = j.at("initial");
    check_keys(i, "initial",
               {"family", "amplitude", "width", "center", "mode", "path"});
    if (i.contains("family")) {
      const std::string fam = i.at("family").get<std::string>();
      if (fam == "gaussian")
        cfg.initial.family = InitialDataSpec::Family::gaussian;
      else if (fam == "plane-wave")
        cfg.initial.family = InitialDataSpec::Family::plane_wave;
      else if (fam == "file")
        cfg.initial.family = InitialDataSpec::Family::file;
      else
        fail("initial.family", "must be \"gaussian\", \"plane-wave\" or \"file\"");
    }
    read(i, "initial", "amplitude", cfg.initial.amplitude);
    read(i, "initial", "width", cfg.initial.width);
    read(i, "initial", "center", cfg.initial.center);
    read(i, "initial", "mode", cfg.initial.mode);
    read(i, "initial", "path", cfg.initial.path);
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    check_keys(r, "run", {"horizon", "snapshot_stride"});
    read_positive(r, "run", "horizon", cfg.horizon);
    read(r, "run", "snapshot_stride", cfg.snapshot_stride);
  }

  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    check_keys(e, "ensemble", {"trajectories", "horizons", "nested"});
    read(e, "ensemble", "trajectories", cfg.trajectories);
    read(e, "ensemble", "horizons", cfg.horizons);
    read(e, "ensemble", "nested", cfg.nested);
  }

  if (j.contains("fit")) {
    const json& f = j.at("fit");
    check_keys(f, "fit", {"bootstrap", "fixed_beta", "use_censored"});
    read(f, "fit", "bootstrap", cfg.fit_bootstrap);
    read(f, "fit", "use_censored", cfg.fit_use_censored);
    if (f.contains("fixed_beta")) {
      if (f.at("fixed_beta").is_null())
        cfg.fit_fixed_beta = -1.0;
      else
        read(f, "fit", "fixed_beta", cfg.fit_fixed_beta);
    }
  }

  if (j.contains("probe")) {
    const json& p = j.at("probe");
    check_keys(p, "probe", {"dispersive", "bdg", "khintchine", "convergence"});
    if (p.contains("dispersive")) {
      const json& d = p.at("dispersive");
      check_keys(d, "probe.dispersive", {"p", "t0", "t1", "samples", "tolerance"});
      read(d, "probe.dispersive", "p", cfg.dispersive.p);
      read_positive(d, "probe.dispersive", "t0", cfg.dispersive.t0);
      read_positive(d, "probe.dispersive", "t1", cfg.dispersive.t1);
      read(d, "probe.dispersive", "samples", cfg.dispersive.samples);
      read(d, "probe.dispersive", "tolerance", cfg.dispersive.tolerance);
    }
    if (p.contains("bdg")) {
      const json& b = p.at("bdg");
      check_keys(b, "probe.bdg",
                 {"horizon", "steps", "rhos", "samples", "ratio_bound"});
      read_positive(b, "probe.bdg", "horizon", cfg.bdg.horizon);
      read(b, "probe.bdg", "steps", cfg.bdg.steps);
      read(b, "probe.bdg", "rhos", cfg.bdg.rhos);
      read(b, "probe.bdg", "samples", cfg.bdg.samples);
      read(b, "probe.bdg", "ratio_bound", cfg.bdg.ratio_bound);
    }
    if (p.contains("khintchine")) {
      const json& k = p.at("khintchine");
      check_keys(k, "probe.khintchine", {"rhos", "samples", "dimension"});
      read(k, "probe.khintchine", "rhos", cfg.khintchine.rhos);
      read(k, "probe.khintchine", "samples", cfg.khintchine.samples);
      read(k, "probe.khintchine", "dimension", cfg.khintchine.dimension);
    }
    if (p.contains("convergence")) {
      const json& c = p.at("convergence");
      check_keys(c, "probe.convergence",
                 {"horizon", "coarse_dt", "levels", "min_slope"});
      read_positive(c, "probe.convergence", "horizon", cfg.convergence.horizon);
      read_positive(c, "probe.convergence", "coarse_dt", cfg.convergence.coarse_dt);
      read(c, "probe.convergence", "levels", cfg.convergence.levels);
      read(c, "probe.convergence", "min_slope", cfg.convergence.min_slope);
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"directory"});
    read(o, "output", "directory", cfg.out_dir);
  }

  read(j, "", "seed", cfg.seed);
  read(j, "", "workers", cfg.workers);

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": parse error at line " +
                      line_of(text, e.byte) + ": " + e.what());
  }
  return parse_config_json(j);
}

void ExperimentConfig::validate() const {
  grid.validate();
  noise.validate();
  solver.validate();
  cutoff.validate();
  noise.resolved_k_max(grid);  // range check against this grid
  if (snapshot_stride < 1)
    throw ConfigError("config: run.snapshot_stride: must be >= 1");
  if (trajectories < 1)
    throw ConfigError("config: ensemble.trajectories: must be >= 1");
  if (horizons.empty())
    throw ConfigError("config: ensemble.horizons: must not be empty");
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i)
    if (!(horizons[i] > horizons[i + 1]))
      throw ConfigError("config: ensemble.horizons: must be strictly decreasing");
  if (!(horizons.back() > 0.0))
    throw ConfigError("config: ensemble.horizons: must be positive");
  if (workers < 1) throw ConfigError("config: workers: must be >= 1");
  if (!initial.center.empty() &&
      initial.center.size() != static_cast<std::size_t>(grid.dim))
    throw ConfigError("config: initial.center: needs one entry per dimension");
  if (!initial.mode.empty() &&
      initial.mode.size() != static_cast<std::size_t>(grid.dim))
    throw ConfigError("config: initial.mode: needs one entry per dimension");
  if (initial.family == InitialDataSpec::Family::gaussian &&
      !(initial.width > 0.0))
    throw ConfigError("config: initial.width: must be positive");
  if (initial.family == InitialDataSpec::Family::file && initial.path.empty())
    throw ConfigError("config: initial.path: required for family \"file\"");
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["grid"] = {{"dimension", cfg.grid.dim},
               {"points", cfg.grid.n},
               {"length", cfg.grid.length}};
  j["noise"] = {
      {"symbol", cfg.noise.family == SymbolFamily::gaussian ? "gaussian" : "sobolev"},
      {"sigma", cfg.noise.sigma},
      {"s", cfg.noise.s},
      {"epsilon", cfg.noise.epsilon},
      {"k_max", cfg.noise.k_max}};
  j["solver"] = {{"dt", cfg.solver.dt},
                 {"splitting",
                  cfg.solver.splitting == Splitting::strang ? "strang" : "lie"},
                 {"p", cfg.solver.p},
                 {"focusing", cfg.solver.mu > 0},
                 {"truncation", cfg.solver.truncation},
                 {"radius", cfg.solver.radius},
                 {"dealias", cfg.solver.dealias},
                 {"step_budget", cfg.solver.step_budget}};
  j["cutoff"] = {{"sharpness", cfg.cutoff.sharpness}};
  const char* family = cfg.initial.family == InitialDataSpec::Family::gaussian
                           ? "gaussian"
                           : cfg.initial.family == InitialDataSpec::Family::plane_wave
                                 ? "plane-wave"
                                 : "file";
  j["initial"] = {{"family", family},
                  {"amplitude", cfg.initial.amplitude},
                  {"width", cfg.initial.width},
                  {"center", cfg.initial.center},
                  {"mode", cfg.initial.mode},
                  {"path", cfg.initial.path}};
  j["run"] = {{"horizon", cfg.horizon}, {"snapshot_stride", cfg.snapshot_stride}};
  j["ensemble"] = {{"trajectories", cfg.trajectories},
                   {"horizons", cfg.horizons},
                   {"nested", cfg.nested}};
  j["fit"] = {{"bootstrap", cfg.fit_bootstrap},
              {"fixed_beta", cfg.fit_fixed_beta > 0.0
                                 ? json(cfg.fit_fixed_beta)
                                 : json(nullptr)},
              {"use_censored", cfg.fit_use_censored}};
  j["probe"] = {
      {"dispersive",
       {{"p", cfg.dispersive.p},
        {"t0", cfg.dispersive.t0},
        {"t1", cfg.dispersive.t1},
        {"samples", cfg.dispersive.samples},
        {"tolerance", cfg.dispersive.tolerance}}},
      {"bdg",
       {{"horizon", cfg.bdg.horizon},
        {"steps", cfg.bdg.steps},
        {"rhos", cfg.bdg.rhos},
        {"samples", cfg.bdg.samples},
        {"ratio_bound", cfg.bdg.ratio_bound}}},
      {"khintchine",
       {{"rhos", cfg.khintchine.rhos},
        {"samples", cfg.khintchine.samples},
        {"dimension", cfg.khintchine.dimension}}},
      {"convergence",
       {{"horizon", cfg.convergence.horizon},
        {"coarse_dt", cfg.convergence.coarse_dt},
        {"levels", cfg.convergence.levels},
        {"min_slope", cfg.convergence.min_slope}}}};
  j["output"] = {{"directory", cfg.out_dir}};
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  return j;
}

Field build_initial_data(const InitialDataSpec& spec, const GridSpec& grid) {
  Field u(grid, Rep::physical);
  switch (spec.family) {
    case InitialDataSpec::Family::gaussian: {
      double center[3];
      for (int a = 0; a < grid.dim; ++a)
        center[a] = spec.center.empty() ? 0.5 * grid.length
                                        : spec.center[static_cast<std::size_t>(a)];
      const double inv2w2 = 1.0 / (2.0 * spec.width * spec.width);
      int idx[3];
      for (std::size_t i = 0; i < u.size(); ++i) {
        unflatten(grid, i, idx);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
          const double dx = grid.coord(idx[a]) - center[a];
          r2 += dx * dx;
        }
        u[i] = Complex{spec.amplitude * std::exp(-r2 * inv2w2), 0.0};
      }
      break;
    }
    case InitialDataSpec::Family::plane_wave: {
      int mode[3] = {1, 0, 0};
      for (std::size_t a = 0; a < spec.mode.size(); ++a) mode[a] = spec.mode[a];
      for (int a = 0; a < grid.dim; ++a)
        if (std::abs(mode[a]) >= grid.n / 2)
          throw ConfigError("config: initial.mode: mode exceeds the grid range");
      int idx[3];
      for (std::size_t i = 0; i < u.size(); ++i) {
        unflatten(grid, i, idx);
        double kx = 0.0;
        for (int a = 0; a < grid.dim; ++a)
          kx += grid.wavenumber(mode[a]) * grid.coord(idx[a]);
        u[i] = spec.amplitude * std::polar(1.0, kx);
      }
      break;
    }
    case InitialDataSpec::Family::file: {
      std::ifstream in(spec.path);
      if (!in) throw ConfigError("config: initial.path: cannot open " + spec.path);
      double re, im;
      std::size_t count = 0;
      while (count < u.size() && (in >> re >> im)) u[count++] = Complex{re, im};
      if (count != u.size())
        throw ConfigError("config: initial.path: expected " +
                          std::to_string(u.size()) + " value pairs, got " +
                          std::to_string(count));
      break;
    }
  }
  return u;
}

EnsembleSetup ensemble_setup(const ExperimentConfig& cfg) {
  EnsembleSetup setup;
  setup.grid = cfg.grid;
  setup.noise = cfg.noise;
  setup.solver = cfg.solver;
  setup.cutoff = cfg.cutoff;
  setup.trajectories = cfg.trajectories;
  setup.root_seed = cfg.seed;
  setup.horizons = cfg.horizons;
  setup.nested = cfg.nested;
  setup.workers = cfg.workers;
  return setup;
}

}  // namespace snls
