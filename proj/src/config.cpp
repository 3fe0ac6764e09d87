#include "wellopt/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wellopt/errors.hpp"

namespace wellopt {

using nlohmann::json;

namespace {

/// Cursor into the document that remembers where it is, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  Node child(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key), "required section is missing");
    return Node(j_[key], at(key));
  }
  std::optional<Node> maybe(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Node(j_[key], at(key));
  }

  template <class T>
  T get(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key), "required field is missing");
    return convert<T>(key);
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? convert<T>(key) : fallback;
  }
  template <class T>
  std::optional<T> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  Bounds bounds(const std::string& key, Bounds fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(at(key), "expected [lower, upper]");
    Bounds b{v[0].get<double>(), v[1].get<double>()};
    if (!(b.lower <= b.upper)) throw ConfigError(at(key), "lower bound exceeds upper bound");
    return b;
  }

  void only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!allowed.contains(k)) throw ConfigError(at(k), "unknown field");
  }

  const json& raw() const { return j_; }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const auto& v = j_[key];
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    } else {
      if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
};

template <class F>
void checked(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

GridGeometry read_grid(const Node& n) {
  n.only({"nx", "ny", "nz", "dx", "dy", "dz", "depth_top"});
  GridGeometry g;
  g.nx = n.get<int>("nx");
  g.ny = n.get<int>("ny");
  g.nz = n.get<int>("nz");
  g.dx = n.get<double>("dx");
  g.dy = n.get<double>("dy");
  g.dz = n.get<double>("dz");
  g.depth_top = n.get<double>("depth_top", 0.0);
  checked(n.at(""), [&] { g.validate(); });
  return g;
}

RockModel read_field(const Node& n, const GridGeometry& grid, const std::filesystem::path& base) {
  n.only({"seed", "log_mean", "log_stddev", "correlation_length", "kz_anisotropy",
          "porosity_mean", "porosity_stddev", "file", "uniform_perm", "compressibility"});
  RockModel rock;
  if (n.has("file")) {
    std::filesystem::path stem = n.get<std::string>("file");
    if (stem.is_relative()) stem = base / stem;
    checked(n.at("file"), [&] { rock = load_rock(stem, grid); });
  } else if (n.has("uniform_perm")) {
    const double k = n.get<double>("uniform_perm");
    const auto cells = grid.cell_count();
    rock.perm_x.assign(cells, k);
    rock.perm_y.assign(cells, k);
    rock.perm_z.assign(cells, k * n.get<double>("kz_anisotropy", 1.0));
    rock.porosity.assign(cells, n.get<double>("porosity_mean", 0.2));
  } else {
    FieldParams p;
    p.log_mean = n.get<double>("log_mean", p.log_mean);
    p.log_stddev = n.get<double>("log_stddev", p.log_stddev);
    p.correlation_length = n.get<double>("correlation_length", p.correlation_length);
    p.kz_anisotropy = n.get<double>("kz_anisotropy", p.kz_anisotropy);
    p.porosity_mean = n.get<double>("porosity_mean", p.porosity_mean);
    p.porosity_stddev = n.get<double>("porosity_stddev", p.porosity_stddev);
    const auto seed = n.get<std::uint64_t>("seed", 1);
    checked(n.at(""), [&] { rock = generate_field(seed, grid, p); });
  }
  rock.compressibility = n.get<double>("compressibility", rock.compressibility);
  checked(n.at(""), [&] { rock.validate(grid); });
  return rock;
}

FluidModel read_fluid(const std::optional<Node>& n) {
  FluidModel f;
  if (!n) return f;
  n->only({"rho_w", "rho_o", "mu_w", "mu_o", "c_w", "c_o", "corey_nw", "corey_no", "swc", "sor",
           "krw_end", "kro_end"});
  f.rho_w = n->get("rho_w", f.rho_w);
  f.rho_o = n->get("rho_o", f.rho_o);
  f.mu_w = n->get("mu_w", f.mu_w);
  f.mu_o = n->get("mu_o", f.mu_o);
  f.c_w = n->get("c_w", f.c_w);
  f.c_o = n->get("c_o", f.c_o);
  f.corey_nw = n->get("corey_nw", f.corey_nw);
  f.corey_no = n->get("corey_no", f.corey_no);
  f.swc = n->get("swc", f.swc);
  f.sor = n->get("sor", f.sor);
  f.krw_end = n->get("krw_end", f.krw_end);
  f.kro_end = n->get("kro_end", f.kro_end);
  checked(n->at(""), [&] { f.validate(); });
  return f;
}

std::shared_ptr<ReservoirModel> read_reservoir(const Node& n, const std::filesystem::path& base) {
  n.only({"grid", "field", "fluid", "initial"});
  auto model = std::make_shared<ReservoirModel>();
  model->grid = read_grid(n.child("grid"));
  const auto field = n.maybe("field");
  model->rock = field ? read_field(*field, model->grid, base)
                      : read_field(Node(json::object(), n.at("field")), model->grid, base);
  model->fluids = read_fluid(n.maybe("fluid"));
  InitialConditions ic;
  ic.s_w_above = model->fluids.swc;
  if (const auto init = n.maybe("initial")) {
    init->only({"p_datum", "owc_depth", "s_w", "hydrostatic"});
    ic.p_datum = init->get("p_datum", ic.p_datum);
    ic.owc_depth = init->get("owc_depth", ic.owc_depth);
    ic.s_w_above = init->get("s_w", ic.s_w_above);
    ic.hydrostatic = init->get("hydrostatic", ic.hydrostatic);
  }
  checked(n.at("initial"), [&] { model->initial = make_initial_state(model->grid, model->fluids, ic); });
  checked(n.at(""), [&] { model->validate(); });
  return model;
}

}  // namespace

ShapeKind parse_shape(const std::string& name) {
  if (name == "vertical") return ShapeKind::Vertical;
  if (name == "horizontal") return ShapeKind::Horizontal;
  if (name == "inclined") return ShapeKind::Inclined;
  throw Error(fmt::format("unknown well shape '{}'", name));
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  const Node root(doc, "");
  root.only({"name", "reservoir", "wells", "controls", "simulator", "economics", "limits",
             "algorithm", "output"});
  ExperimentConfig cfg;
  cfg.name = root.get<std::string>("name", "experiment");
  auto& spec = cfg.problem;
  spec.model = read_reservoir(root.child("reservoir"), base_dir);

  {
    const auto w = root.child("wells");
    w.only({"injectors", "producers", "shape", "r_well", "bounds", "horizontal_layer"});
    const int ninj = w.get<int>("injectors");
    const int nprod = w.get<int>("producers");
    if (ninj < 0) throw ConfigError(w.at("injectors"), "must be >= 0");
    if (nprod < 0) throw ConfigError(w.at("producers"), "must be >= 0");
    if (ninj + nprod < 1) throw ConfigError(w.at("producers"), "need at least one well");
    ShapeKind kind{};
    checked(w.at("shape"), [&] { kind = parse_shape(w.get<std::string>("shape")); });
    for (int i = 0; i < ninj; ++i)
      spec.wells.push_back({WellRole::Injector, kind, fmt::format("I{}", i + 1)});
    for (int i = 0; i < nprod; ++i)
      spec.wells.push_back({WellRole::Producer, kind, fmt::format("P{}", i + 1)});
    spec.r_well = w.get("r_well", spec.r_well);
    spec.positions.horizontal_layer = w.get("horizontal_layer", 0);
    if (spec.positions.horizontal_layer < 0 || spec.positions.horizontal_layer >= spec.model->grid.nz)
      throw ConfigError(w.at("horizontal_layer"), "outside the grid layers");
    const double thick = spec.model->grid.thickness();
    spec.positions.z_injector = {0.0, thick};
    spec.positions.z_producer = {0.0, thick};
    if (const auto b = w.maybe("bounds")) {
      b->only({"l", "phi", "z_injector", "z_producer"});
      const auto l = b->bounds("l", {spec.positions.l_min, spec.positions.l_max});
      spec.positions.l_min = l.lower;
      spec.positions.l_max = l.upper;
      const auto phi = b->bounds("phi", {spec.positions.phi_min, spec.positions.phi_max});
      spec.positions.phi_min = phi.lower;
      spec.positions.phi_max = phi.upper;
      spec.positions.z_injector = b->bounds("z_injector", spec.positions.z_injector);
      spec.positions.z_producer = b->bounds("z_producer", spec.positions.z_producer);
    }
  }

  {
    const auto c = root.child("controls");
    c.only({"T_years", "interval_years", "injector_bhp", "producer_bhp", "fixed",
            "report_step_days"});
    spec.period_years = c.get<double>("T_years");
    spec.interval_years = c.get<double>("interval_years");
    spec.injector_bhp = c.bounds("injector_bhp", spec.injector_bhp);
    spec.producer_bhp = c.bounds("producer_bhp", spec.producer_bhp);
    if (const auto f = c.maybe("fixed")) {
      f->only({"injector", "producer"});
      spec.fixed_controls = FixedControls{f->get<double>("injector"), f->get<double>("producer")};
    }
    spec.simulator.report_step_days = c.get("report_step_days", spec.simulator.report_step_days);
    if (!(spec.period_years > 0)) throw ConfigError(c.at("T_years"), "must be > 0");
    if (!(spec.interval_years > 0)) throw ConfigError(c.at("interval_years"), "must be > 0");
    if (std::abs(spec.intervals() * spec.interval_years - spec.period_years) > 1e-9 * spec.period_years)
      throw ConfigError(c.at("interval_years"), "must divide T_years");
    if (!(spec.simulator.report_step_days > 0))
      throw ConfigError(c.at("report_step_days"), "must be > 0");
  }

  if (const auto s = root.maybe("simulator")) {
    s->only({"solver", "cfl", "cg_tolerance", "max_substeps_per_step"});
    const auto solver = s->get<std::string>("solver", "cholesky");
    if (solver == "cholesky")
      spec.simulator.solver = PressureSolver::Cholesky;
    else if (solver == "cg")
      spec.simulator.solver = PressureSolver::ConjugateGradient;
    else
      throw ConfigError(s->at("solver"), "expected \"cholesky\" or \"cg\"");
    spec.simulator.cfl = s->get("cfl", spec.simulator.cfl);
    spec.simulator.cg_tolerance = s->get("cg_tolerance", spec.simulator.cg_tolerance);
    spec.simulator.max_substeps_per_step =
        s->get("max_substeps_per_step", spec.simulator.max_substeps_per_step);
    if (!(spec.simulator.cfl > 0 && spec.simulator.cfl <= 1)) throw ConfigError(s->at("cfl"), "must lie in (0, 1]");
  }

  if (const auto e = root.maybe("economics")) {
    e->only({"c_o", "c_w_inj", "c_w_disp", "r", "base_drill_cost", "drill_cost_per_m"});
    auto& econ = spec.econ;
    econ.c_o = e->get("c_o", econ.c_o);
    econ.c_w_inj = e->get("c_w_inj", econ.c_w_inj);
    econ.c_w_disp = e->get("c_w_disp", econ.c_w_disp);
    econ.r = e->get("r", econ.r);
    econ.base_drill_cost = e->get("base_drill_cost", econ.base_drill_cost);
    econ.drill_cost_per_m = e->get("drill_cost_per_m", econ.drill_cost_per_m);
    checked(e->at(""), [&] { econ.validate(); });
  }

  if (const auto l = root.maybe("limits")) {
    l->only({"q_max_inj", "q_max_prod"});
    spec.limits.q_max_inj = l->opt<double>("q_max_inj");
    spec.limits.q_max_prod = l->opt<double>("q_max_prod");
    checked(l->at(""), [&] { spec.limits.validate(); });
  }

  {
    const auto a = root.child("algorithm");
    a.only({"name", "budget", "lhs_points", "pso", "mads", "stages", "stage2_initial_poll",
            "seq2_bhp", "n_repeats", "base_seed"});
    auto& alg = cfg.algorithm;
    checked(a.at("name"), [&] { alg.algorithm = parse_algorithm(a.get<std::string>("name")); });
    alg.budget = a.get<long>("budget");
    if (alg.budget < 1) throw ConfigError(a.at("budget"), "must be >= 1");
    spec.budget = alg.budget;
    alg.mads.lhs_points = a.get<std::size_t>("lhs_points", alg.mads.lhs_points);
    if (alg.mads.lhs_points < 1) throw ConfigError(a.at("lhs_points"), "must be >= 1");
    if (const auto p = a.maybe("pso")) {
      p->only({"size", "iota", "mu", "nu", "stagnation"});
      alg.pso.size = p->get("size", alg.pso.size);
      alg.pso.iota = p->get("iota", alg.pso.iota);
      alg.pso.mu = p->get("mu", alg.pso.mu);
      alg.pso.nu = p->get("nu", alg.pso.nu);
      alg.pso.stagnation = p->get("stagnation", alg.pso.stagnation);
      if (alg.pso.size < 2) throw ConfigError(p->at("size"), "must be >= 2");
      if (alg.pso.stagnation < 1) throw ConfigError(p->at("stagnation"), "must be >= 1");
    }
    if (const auto m = a.maybe("mads")) {
      m->only({"initial_poll", "delta_min", "max_iterations"});
      alg.mads.initial_poll = m->get("initial_poll", alg.mads.initial_poll);
      alg.mads.delta_min = m->get("delta_min", alg.mads.delta_min);
      alg.mads.max_iterations = m->get("max_iterations", alg.mads.max_iterations);
      if (!(alg.mads.initial_poll > 0 && alg.mads.initial_poll <= 1))
        throw ConfigError(m->at("initial_poll"), "must lie in (0, 1]");
      if (!(alg.mads.delta_min > 0)) throw ConfigError(m->at("delta_min"), "must be > 0");
    }
    if (a.has("stages")) {
      const auto& st = a.raw()["stages"];
      if (!st.is_array() || st.size() != 2 || !st[0].is_number_integer() || !st[1].is_number_integer())
        throw ConfigError(a.at("stages"), "expected [stage1_budget, stage2_budget]");
      alg.stage1_budget = st[0].get<long>();
      alg.stage2_budget = st[1].get<long>();
      if (*alg.stage1_budget < 0 || *alg.stage2_budget < 0 ||
          *alg.stage1_budget + *alg.stage2_budget > alg.budget)
        throw ConfigError(a.at("stages"), "stage budgets must be >= 0 and sum to at most the budget");
    }
    alg.stage2_initial_poll = a.get("stage2_initial_poll", alg.stage2_initial_poll);
    if (!(alg.stage2_initial_poll > 0 && alg.stage2_initial_poll <= 1))
      throw ConfigError(a.at("stage2_initial_poll"), "must lie in (0, 1]");
    if (a.has("seq2_bhp")) {
      const auto& raw = a.raw()["seq2_bhp"];
      if (!raw.is_array() || raw.size() != 2 || !raw[0].is_number() || !raw[1].is_number())
        throw ConfigError(a.at("seq2_bhp"), "expected [injector_bhp, producer_bhp]");
      alg.seq2_controls = {raw[0].get<double>(), raw[1].get<double>()};
    }
    cfg.n_repeats = a.get("n_repeats", 1);
    if (cfg.n_repeats < 1) throw ConfigError(a.at("n_repeats"), "must be >= 1");
    cfg.base_seed = a.get<std::uint64_t>("base_seed", 1);
  }

  if (const auto o = root.maybe("output")) {
    o->only({"dir", "dump_simulation"});
    cfg.output.dir = o->get<std::string>("dir", cfg.output.dir.string());
    cfg.output.dump_simulation = o->get("dump_simulation", false);
  }
  if (cfg.output.dir.is_relative() && !base_dir.empty()) cfg.output.dir = base_dir / cfg.output.dir;

  checked("controls", [&] { spec.validate(); });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", fmt::format("cannot open {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(doc, path.parent_path());
}

json solution_to_json(const ReservoirProblem& problem, const EvaluationRecord& record,
                      std::string_view algorithm, std::uint64_t seed) {
  const Candidate c = problem.decode(record.x);
  json wells = json::array();
  for (const auto& w : c.wells) {
    json jw{{"label", w.label}, {"role", to_string(w.role)}, {"shape", to_string(shape_kind(w.shape))}};
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, VerticalWell>) {
            jw["x_idx"] = s.x_idx;
            jw["y_idx"] = s.y_idx;
          } else if constexpr (std::is_same_v<T, HorizontalWell>) {
            jw["x"] = s.x;
            jw["y"] = s.y;
            jw["l"] = s.l;
            jw["theta"] = s.theta;
            jw["layer"] = s.layer;
          } else {
            jw["x"] = s.x;
            jw["y"] = s.y;
            jw["z"] = s.z;
            jw["l"] = s.l;
            jw["theta"] = s.theta;
            jw["phi"] = s.phi;
          }
        },
        w.shape);
    wells.push_back(std::move(jw));
  }
  return json{{"format", "wellopt-solution"},
              {"version", 1},
              {"algorithm", std::string(algorithm)},
              {"seed", seed},
              {"npv", record.eval.npv},
              {"h", record.eval.h},
              {"feasible", record.eval.feasible},
              {"wells", std::move(wells)},
              {"schedule",
               {{"interval_years", c.schedule.interval_years},
                {"injector_bhp", {c.schedule.injector.lower, c.schedule.injector.upper}},
                {"producer_bhp", {c.schedule.producer.lower, c.schedule.producer.upper}},
                {"bhp", c.schedule.bhp}}},
              {"x", record.x}};
}

Solution solution_from_json(const json& doc) {
  const Node root(doc, "");
  Solution sol;
  sol.npv = root.opt<double>("npv");
  sol.h = root.opt<double>("h");
  if (!root.has("wells") || !doc["wells"].is_array()) throw ConfigError("wells", "expected an array");
  for (std::size_t i = 0; i < doc["wells"].size(); ++i) {
    const Node w(doc["wells"][i], fmt::format("wells[{}]", i));
    WellSpec spec;
    spec.label = w.get<std::string>("label");
    const auto role = w.get<std::string>("role");
    if (role != "injector" && role != "producer") throw ConfigError(w.at("role"), "expected injector or producer");
    spec.role = role == "injector" ? WellRole::Injector : WellRole::Producer;
    ShapeKind kind{};
    checked(w.at("shape"), [&] { kind = parse_shape(w.get<std::string>("shape")); });
    switch (kind) {
      case ShapeKind::Vertical:
        spec.shape = VerticalWell{w.get<int>("x_idx"), w.get<int>("y_idx")};
        break;
      case ShapeKind::Horizontal:
        spec.shape = HorizontalWell{w.get<double>("x"), w.get<double>("y"), w.get<double>("l"),
                                    w.get<double>("theta"), w.get<int>("layer", 0)};
        break;
      case ShapeKind::Inclined:
        spec.shape = InclinedWell{w.get<double>("x"), w.get<double>("y"), w.get<double>("z"),
                                  w.get<double>("l"), w.get<double>("theta"), w.get<double>("phi")};
        break;
    }
    sol.candidate.wells.push_back(std::move(spec));
  }
  const auto s = root.child("schedule");
  sol.candidate.schedule.interval_years = s.get<double>("interval_years");
  sol.candidate.schedule.injector = s.bounds("injector_bhp", sol.candidate.schedule.injector);
  sol.candidate.schedule.producer = s.bounds("producer_bhp", sol.candidate.schedule.producer);
  try {
    sol.candidate.schedule.bhp = s.raw().at("bhp").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ConfigError(s.at("bhp"), e.what());
  }
  checked("schedule", [&] { sol.candidate.schedule.validate(sol.candidate.wells); });
  return sol;
}

}  // namespace wellopt
