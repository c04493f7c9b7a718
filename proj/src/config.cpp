#include "incstab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "incstab/srg.hpp"

namespace incstab {

namespace {

using nlohmann::json;

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string Item(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void RequireObject(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void CheckKeys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  RequireObject(j, path);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(Join(path, key), "unknown key");
  }
}

const json& Require(const json& j, const std::string& key, const std::string& path) {
  RequireObject(j, path);
  if (!j.contains(key)) throw ConfigError(Join(path, key), "missing required key");
  return j.at(key);
}

Scalar ToNumber(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const Scalar v = j.get<Scalar>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

Scalar Number(const json& j, const std::string& key, const std::string& path) {
  return ToNumber(Require(j, key, path), Join(path, key));
}

Scalar NumberOr(const json& j, const std::string& key, const std::string& path, Scalar fallback) {
  return j.contains(key) ? ToNumber(j.at(key), Join(path, key)) : fallback;
}

Scalar Positive(Scalar v, const std::string& path) {
  if (!(v > 0)) throw ConfigError(path, "must be > 0");
  return v;
}

long Integer(const json& j, const std::string& path, long lo, long hi) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  const long v = j.get<long>();
  if (v < lo || v > hi) {
    throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::string String(const json& j, const std::string& key, const std::string& path) {
  const json& v = Require(j, key, path);
  if (!v.is_string()) throw ConfigError(Join(path, key), "expected a string");
  return v.get<std::string>();
}

std::string StringOr(const json& j, const std::string& key, const std::string& path,
                     const std::string& fallback) {
  return j.contains(key) ? String(j, key, path) : fallback;
}

bool BoolOr(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(Join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

/// A number is a 1x1 matrix; otherwise a non-empty array of equal-length rows.
Matrix ParseMatrix(const json& j, const std::string& path) {
  if (j.is_number()) return Matrix::Constant(1, 1, ToNumber(j, path));
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a number or an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].empty()) {
      throw ConfigError(path, "row " + std::to_string(i) + " must be a non-empty array");
    }
    if (i == 0) cols = j[i].size();
    if (j[i].size() != cols) {
      throw ConfigError(path, "row " + std::to_string(i) + " has " + std::to_string(j[i].size()) +
                                  " entries, expected " + std::to_string(cols));
    }
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Index>(i), static_cast<Index>(k)) =
          ToNumber(j[i][k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  return m;
}

Complex ParseComplex(const json& j, const std::string& path) {
  if (j.is_number()) return {ToNumber(j, path), 0};
  if (j.is_array() && j.size() == 2) return {ToNumber(j[0], Item(path, 0)), ToNumber(j[1], Item(path, 1))};
  throw ConfigError(path, "expected a number or [re, im]");
}

ComplexMatrix ParseComplexMatrix(const json& j, const std::string& path, Index size) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(size)) {
    throw ConfigError(path, "expected " + std::to_string(size) + " rows");
  }
  ComplexMatrix m(size, size);
  for (Index i = 0; i < size; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    const std::string rp = Item(path, static_cast<std::size_t>(i));
    if (!row.is_array() || row.size() != static_cast<std::size_t>(size)) {
      throw ConfigError(rp, "expected " + std::to_string(size) + " entries");
    }
    for (Index k = 0; k < size; ++k) {
      m(i, k) = ParseComplex(row[static_cast<std::size_t>(k)], Item(rp, static_cast<std::size_t>(k)));
    }
  }
  return m;
}

Primitive ParsePrimitive(const json& j, const std::string& path) {
  RequireObject(j, path);
  if (j.size() != 1) throw ConfigError(path, "expected exactly one of disc, halfplane, discext");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string bp = Join(path, kind);
  if (kind == "disc" || kind == "discext") {
    CheckKeys(body, bp, {"re", "im", "r"});
    const Complex c(NumberOr(body, "re", bp, 0), NumberOr(body, "im", bp, 0));
    const Scalar r = Number(body, "r", bp);
    if (r < 0) throw ConfigError(Join(bp, "r"), "radius must be >= 0");
    if (kind == "disc") return Disc{c, r};
    return DiscExterior{c, r};
  }
  if (kind == "halfplane") {
    CheckKeys(body, bp, {"nre", "nim", "offset"});
    const Complex n(NumberOr(body, "nre", bp, 0), NumberOr(body, "nim", bp, 0));
    if (std::abs(n) == 0) throw ConfigError(bp, "normal must be nonzero");
    return MakeHalfPlane(n, NumberOr(body, "offset", bp, 0));
  }
  throw ConfigError(bp, "unknown region primitive (expected disc, halfplane or discext)");
}

Region ParseRegion(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of regions");
  std::vector<Primitive> prims;
  for (std::size_t i = 0; i < j.size(); ++i) prims.push_back(ParsePrimitive(j[i], Item(path, i)));
  return Region(std::move(prims));
}

class SystemBuilder {
 public:
  explicit SystemBuilder(const json& systems) : systems_(systems) {}

  OperatorSpec Get(const std::string& name, const std::string& ref_path) {
    if (auto it = built_.find(name); it != built_.end()) return it->second;
    if (!systems_.contains(name)) throw ConfigError(ref_path, "unknown system '" + name + "'");
    if (!visiting_.insert(name).second) {
      throw ConfigError(ref_path, "reference cycle through system '" + name + "'");
    }
    const std::string path = Join("systems", name);
    const json& entry = systems_.at(name);
    CheckKeys(entry, path, {"node", "declared", "description"});
    OperatorSpec op = Node(Require(entry, "node", path), Join(path, "node"));
    if (entry.contains("declared")) op = Declared(op, entry.at("declared"), Join(path, "declared"));
    visiting_.erase(name);
    built_.emplace(name, op);
    return op;
  }

 private:
  OperatorSpec Declared(OperatorSpec op, const json& j, const std::string& path) {
    CheckKeys(j, path, {"inc_gain", "srg", "defaults", "notes"});
    if (BoolOr(j, "defaults", path, false)) op = WithDefaultDeclarations(op);
    if (j.contains("inc_gain")) {
      const Scalar g = Number(j, "inc_gain", path);
      if (g < 0) throw ConfigError(Join(path, "inc_gain"), "must be >= 0");
      op = op.WithDeclaredGain(g);
    }
    if (j.contains("srg")) {
      try {
        op = op.WithDeclaredSrg(ParseRegion(j.at("srg"), Join(path, "srg")));
      } catch (const RegionError& e) {
        throw ConfigError(Join(path, "srg"), e.what());
      }
    }
    if (j.contains("notes")) {
      const json& notes = j.at("notes");
      if (!notes.is_array()) throw ConfigError(Join(path, "notes"), "expected an array of strings");
      for (std::size_t i = 0; i < notes.size(); ++i) {
        if (!notes[i].is_string()) throw ConfigError(Item(Join(path, "notes"), i), "expected a string");
        op = op.WithNote(notes[i].get<std::string>());
      }
    }
    return op;
  }

  OperatorSpec Lti(const json& j, const std::string& path) {
    CheckKeys(j, path, {"type", "A", "B", "C", "D"});
    StateSpace sys;
    sys.A = ParseMatrix(Require(j, "A", path), Join(path, "A"));
    sys.B = ParseMatrix(Require(j, "B", path), Join(path, "B"));
    sys.C = ParseMatrix(Require(j, "C", path), Join(path, "C"));
    const auto n = sys.A.rows();
    if (sys.A.cols() != n) {
      throw ConfigError(Join(path, "A"), "must be square, got " + std::to_string(n) + "x" +
                                             std::to_string(sys.A.cols()));
    }
    if (sys.B.rows() != n) {
      throw ConfigError(Join(path, "B"), "must have " + std::to_string(n) + " rows");
    }
    if (sys.C.cols() != n) {
      throw ConfigError(Join(path, "C"), "must have " + std::to_string(n) + " columns");
    }
    sys.D = j.contains("D") ? ParseMatrix(j.at("D"), Join(path, "D"))
                            : Matrix::Zero(sys.C.rows(), sys.B.cols());
    if (sys.D.rows() != sys.C.rows() || sys.D.cols() != sys.B.cols()) {
      throw ConfigError(Join(path, "D"), "must be " + std::to_string(sys.C.rows()) + "x" +
                                             std::to_string(sys.B.cols()));
    }
    if (!IsHurwitz(sys.A)) throw ConfigError(Join(path, "A"), "must be Hurwitz (stable)");
    return MakeLti(std::move(sys));
  }

  OperatorSpec Node(const json& j, const std::string& path) {
    const std::string type = String(j, "type", path);
    if (type == "lti") return Lti(j, path);
    if (type == "lag") {
      CheckKeys(j, path, {"type", "k", "a"});
      const Scalar a = Number(j, "a", path);
      if (!(a > 0)) throw ConfigError(Join(path, "a"), "pole -a must be stable: a > 0");
      return FirstOrderLag(Number(j, "k", path), a);
    }
    if (type == "static") {
      CheckKeys(j, path, {"type", "kind", "param"});
      NonlinearityKind kind;
      try {
        kind = ParseNonlinearityKind(String(j, "kind", path));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(Join(path, "kind"), e.what());
      }
      const Scalar param = NumberOr(j, "param", path, 0);
      if ((kind == NonlinearityKind::kSaturation) && !(param > 0)) {
        throw ConfigError(Join(path, "param"), "saturation limit must be > 0");
      }
      if ((kind == NonlinearityKind::kDeadzone) && param < 0) {
        throw ConfigError(Join(path, "param"), "dead-band half-width must be >= 0");
      }
      return MakeStatic(kind, param);
    }
    if (type == "scale") {
      CheckKeys(j, path, {"type", "c", "inner"});
      return MakeScale(Number(j, "c", path), Node(Require(j, "inner", path), Join(path, "inner")));
    }
    if (type == "sum") {
      CheckKeys(j, path, {"type", "left", "right"});
      return MakeSum(Node(Require(j, "left", path), Join(path, "left")),
                     Node(Require(j, "right", path), Join(path, "right")));
    }
    if (type == "feedback") {
      CheckKeys(j, path, {"type", "forward", "backward", "tau"});
      const Scalar tau = NumberOr(j, "tau", path, 1);
      if (tau < 0 || tau > 1) throw ConfigError(Join(path, "tau"), "must lie in [0, 1]");
      return MakeFeedback(Node(Require(j, "forward", path), Join(path, "forward")),
                          Node(Require(j, "backward", path), Join(path, "backward")), tau);
    }
    if (type == "ref") {
      CheckKeys(j, path, {"type", "name"});
      return Get(String(j, "name", path), Join(path, "name"));
    }
    throw ConfigError(Join(path, "type"),
                      "unknown node type '" + type + "' (lti, lag, static, scale, sum, feedback, ref)");
  }

  const json& systems_;
  std::map<std::string, OperatorSpec> built_;
  std::set<std::string> visiting_;
};

ProbeOptions ParseProbes(const json& params, const std::string& parent, std::uint64_t seed,
                         Index dim) {
  ProbeOptions p;
  p.dim = dim;
  p.seed = seed;
  if (!params.contains("probes")) return p;
  const std::string path = Join(parent, "probes");
  const json& j = params.at("probes");
  CheckKeys(j, path, {"horizon", "dt", "amplitude", "sinusoids", "noise", "omega_min", "omega_max",
                      "offset", "noise_cutoff", "seed"});
  p.horizon = Positive(NumberOr(j, "horizon", path, p.horizon), Join(path, "horizon"));
  p.dt = Positive(NumberOr(j, "dt", path, p.dt), Join(path, "dt"));
  if (p.horizon / p.dt < 8) throw ConfigError(Join(path, "dt"), "needs at least 8 samples per horizon");
  if (p.horizon / p.dt > 1e6) throw ConfigError(Join(path, "dt"), "more than 1e6 samples per probe");
  p.amplitude = Positive(NumberOr(j, "amplitude", path, p.amplitude), Join(path, "amplitude"));
  if (j.contains("sinusoids")) p.sinusoids = static_cast<int>(Integer(j.at("sinusoids"), Join(path, "sinusoids"), 0, 64));
  if (j.contains("noise")) p.noise = static_cast<int>(Integer(j.at("noise"), Join(path, "noise"), 0, 64));
  p.omega_min = Positive(NumberOr(j, "omega_min", path, p.omega_min), Join(path, "omega_min"));
  p.omega_max = Positive(NumberOr(j, "omega_max", path, p.omega_max), Join(path, "omega_max"));
  if (p.omega_max < p.omega_min) throw ConfigError(Join(path, "omega_max"), "must be >= omega_min");
  p.offset = NumberOr(j, "offset", path, p.offset);
  p.noise_cutoff = Positive(NumberOr(j, "noise_cutoff", path, p.noise_cutoff), Join(path, "noise_cutoff"));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError(Join(path, "seed"), "expected an unsigned integer");
    p.seed = j.at("seed").get<std::uint64_t>();
  }
  return p;
}

SolveOptions ParseSolve(const json& params, const std::string& parent) {
  SolveOptions s;
  if (!params.contains("solver")) return s;
  const std::string path = Join(parent, "solver");
  const json& j = params.at("solver");
  CheckKeys(j, path, {"tolerance", "max_iterations", "divergence_window"});
  s.tolerance = Positive(NumberOr(j, "tolerance", path, s.tolerance), Join(path, "tolerance"));
  if (j.contains("max_iterations")) {
    s.max_iterations = static_cast<int>(Integer(j.at("max_iterations"), Join(path, "max_iterations"), 1, 1'000'000));
  }
  if (j.contains("divergence_window")) {
    s.divergence_window = static_cast<int>(Integer(j.at("divergence_window"), Join(path, "divergence_window"), 2, 1'000'000));
  }
  return s;
}

Index InputDim(const OperatorSpec& op) { return op.input_dim() == 0 ? 1 : op.input_dim(); }

Multiplier ParseMultiplier(const json& j, const std::string& path, Index ny, Index nw) {
  RequireObject(j, path);
  if (j.size() != 1) throw ConfigError(path, "expected exactly one of smallgain, passivity, constant, table");
  const std::string kind = j.begin().key();
  const json& body = j.begin().value();
  const std::string bp = Join(path, kind);
  try {
    if (kind == "smallgain") {
      CheckKeys(body, bp, {"gamma"});
      return SmallGainMultiplier(Positive(Number(body, "gamma", bp), Join(bp, "gamma")), ny, nw);
    }
    if (kind == "passivity") {
      CheckKeys(body, bp, {});
      if (ny != nw) throw ConfigError(bp, "passivity needs as many outputs as inputs on h1");
      return PassivityMultiplier(ny);
    }
    if (kind == "constant") {
      CheckKeys(body, bp, {"matrix"});
      return ConstantMultiplier(ParseComplexMatrix(Require(body, "matrix", bp), Join(bp, "matrix"), ny + nw), ny, nw);
    }
    if (kind == "table") {
      if (!body.is_array() || body.empty()) throw ConfigError(bp, "expected a non-empty array");
      std::vector<std::pair<Scalar, ComplexMatrix>> table;
      for (std::size_t i = 0; i < body.size(); ++i) {
        const std::string ep = Item(bp, i);
        CheckKeys(body[i], ep, {"omega", "matrix"});
        table.emplace_back(Number(body[i], "omega", ep),
                           ParseComplexMatrix(Require(body[i], "matrix", ep), Join(ep, "matrix"), ny + nw));
      }
      return TableMultiplier(std::move(table), ny, nw);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(bp, e.what());
  }
  throw ConfigError(bp, "unknown multiplier (expected smallgain, passivity, constant or table)");
}

std::vector<Scalar> ParseTauGrid(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<Scalar> taus;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Scalar t = ToNumber(j[i], Item(path, i));
    if (t < 0 || t > 1) throw ConfigError(Item(path, i), "must lie in [0, 1]");
    taus.push_back(t);
  }
  return taus;
}

const OperatorSpec& System(const JobConfig& cfg, const std::string& name, const std::string& path) {
  auto it = cfg.systems.find(name);
  if (it == cfg.systems.end()) throw ConfigError(path, "unknown system '" + name + "'");
  return it->second;
}

void RequireGain(const OperatorSpec& op, const std::string& path, const std::string& name) {
  if (!op.declared_inc_gain()) {
    throw ConfigError(path, "system '" + name + "' needs declared.inc_gain (or declared.defaults)");
  }
}

void RequireSrg(const OperatorSpec& op, const std::string& path, const std::string& name) {
  RequireGain(op, path, name);
  if (!op.declared_srg()) {
    throw ConfigError(path, "system '" + name + "' needs declared.srg (or declared.defaults)");
  }
}

JobParameters ParseParameters(const JobConfig& cfg, const json& params, const std::filesystem::path& base_dir) {
  const std::string path = "parameters";
  RequireObject(params, path);
  const std::string& job = cfg.job;
  auto names = [&](auto& p) {
    p.h1 = StringOr(params, "h1", path, "h1");
    p.h2 = StringOr(params, "h2", path, "h2");
  };
  if (job == "small_gain") {
    CheckKeys(params, path, {"h1", "h2", "gamma1", "gamma2"});
    SmallGainJob p;
    names(p);
    for (const char* key : {"gamma1", "gamma2"}) {
      if (!params.contains(key)) continue;
      const Scalar g = Number(params, key, path);
      if (g < 0) throw ConfigError(Join(path, key), "must be >= 0");
      (std::string(key) == "gamma1" ? p.gamma1 : p.gamma2) = g;
    }
    if (!p.gamma1) RequireGain(System(cfg, p.h1, Join(path, "h1")), Join(path, "h1"), p.h1);
    if (!p.gamma2) RequireGain(System(cfg, p.h2, Join(path, "h2")), Join(path, "h2"), p.h2);
    return p;
  }
  if (job == "certify_srg") {
    CheckKeys(params, path, {"h1", "h2", "mode", "assume_well_posed", "cross_check", "probes",
                             "solver", "separation"});
    SrgJob p;
    names(p);
    const auto& h1 = System(cfg, p.h1, Join(path, "h1"));
    const auto& h2 = System(cfg, p.h2, Join(path, "h2"));
    RequireSrg(h1, Join(path, "h1"), p.h1);
    RequireSrg(h2, Join(path, "h2"), p.h2);
    const std::string mode = StringOr(params, "mode", path, "standard");
    if (mode != "standard" && mode != "relaxed") {
      throw ConfigError(Join(path, "mode"), "expected standard or relaxed");
    }
    p.relaxed = mode == "relaxed";
    p.assume_well_posed = BoolOr(params, "assume_well_posed", path, false);
    p.cross_check = BoolOr(params, "cross_check", path, true);
    p.probes = ParseProbes(params, path, cfg.seed, InputDim(h1));
    p.solve = ParseSolve(params, path);
    if (params.contains("separation")) {
      const std::string sp = Join(path, "separation");
      const json& s = params.at("separation");
      CheckKeys(s, sp, {"initial_grid", "relative_slack", "max_evaluations"});
      if (s.contains("initial_grid")) p.separation.initial_grid = Integer(s.at("initial_grid"), Join(sp, "initial_grid"), 2, 1'000'000);
      p.separation.relative_slack = Positive(NumberOr(s, "relative_slack", sp, p.separation.relative_slack), Join(sp, "relative_slack"));
      if (s.contains("max_evaluations")) p.separation.max_evaluations = Integer(s.at("max_evaluations"), Join(sp, "max_evaluations"), 16, 100'000'000);
    }
    return p;
  }
  if (job == "certify_iqc") {
    CheckKeys(params, path, {"h1", "h2", "multiplier", "grid_points", "tau_grid", "cross_check",
                             "probes", "solver"});
    IqcJob p;
    names(p);
    const auto& h1 = System(cfg, p.h1, Join(path, "h1"));
    const auto& h2 = System(cfg, p.h2, Join(path, "h2"));
    const auto* lti = std::get_if<LtiNode>(&h1.node().value);
    if (lti == nullptr) throw ConfigError(Join(path, "h1"), "IQC route needs an LTI h1");
    RequireGain(h2, Join(path, "h2"), p.h2);
    p.multiplier = ParseMultiplier(Require(params, "multiplier", path), Join(path, "multiplier"),
                                   lti->sys.outputs(), lti->sys.inputs());
    if (params.contains("grid_points")) p.grid_points = Integer(params.at("grid_points"), Join(path, "grid_points"), 2, 1'000'000);
    if (params.contains("tau_grid")) p.tau_grid = ParseTauGrid(params.at("tau_grid"), Join(path, "tau_grid"));
    p.cross_check = BoolOr(params, "cross_check", path, true);
    p.probes = ParseProbes(params, path, cfg.seed, lti->sys.outputs());
    p.solve = ParseSolve(params, path);
    return p;
  }
  if (job == "simulate") {
    CheckKeys(params, path, {"h1", "h2", "tau", "input", "solver"});
    SimulateJob p;
    names(p);
    System(cfg, p.h1, Join(path, "h1"));
    System(cfg, p.h2, Join(path, "h2"));
    p.tau = NumberOr(params, "tau", path, 1);
    if (p.tau < 0 || p.tau > 1) throw ConfigError(Join(path, "tau"), "must lie in [0, 1]");
    p.solve = ParseSolve(params, path);
    const std::string ip = Join(path, "input");
    const json& in = Require(params, "input", path);
    CheckKeys(in, ip, {"type", "amplitude", "omega", "width", "horizon", "dt", "path"});
    const std::string type = String(in, "type", ip);
    if (type == "step") p.input.kind = InputKind::kStep;
    else if (type == "sine") p.input.kind = InputKind::kSine;
    else if (type == "pulse") p.input.kind = InputKind::kPulse;
    else if (type == "csv") p.input.kind = InputKind::kCsv;
    else throw ConfigError(Join(ip, "type"), "expected step, sine, pulse or csv");
    if (p.input.kind == InputKind::kCsv) {
      p.input.csv = base_dir / String(in, "path", ip);
    } else {
      p.input.amplitude = NumberOr(in, "amplitude", ip, 1);
      p.input.omega = NumberOr(in, "omega", ip, 1);
      p.input.width = Positive(NumberOr(in, "width", ip, 1), Join(ip, "width"));
      p.input.horizon = Positive(NumberOr(in, "horizon", ip, 10), Join(ip, "horizon"));
      p.input.dt = Positive(NumberOr(in, "dt", ip, 1e-2), Join(ip, "dt"));
      if (p.input.horizon / p.input.dt > 1e6) throw ConfigError(Join(ip, "dt"), "more than 1e6 samples");
      if (p.input.horizon / p.input.dt < 1) throw ConfigError(Join(ip, "dt"), "must not exceed the horizon");
    }
    return p;
  }
  if (job == "srg_sample") {
    CheckKeys(params, path, {"system", "probes"});
    SrgSampleJob p;
    p.system = StringOr(params, "system", path, "h1");
    const auto& op = System(cfg, p.system, Join(path, "system"));
    p.probes = ParseProbes(params, path, cfg.seed, InputDim(op));
    return p;
  }
  if (job == "arctan_experiment") {
    CheckKeys(params, path, {"amplitudes", "horizon", "dt"});
    ArctanJob p;
    const std::string ap = Join(path, "amplitudes");
    const json& amps = Require(params, "amplitudes", path);
    if (!amps.is_array() || amps.empty()) throw ConfigError(ap, "expected a non-empty array");
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const Scalar a = ToNumber(amps[i], Item(ap, i));
      if (!(a > 0 && a <= 0.1)) throw ConfigError(Item(ap, i), "amplitude must lie in (0, 0.1]");
      p.amplitudes.push_back(a);
    }
    p.options.horizon = Positive(NumberOr(params, "horizon", path, p.options.horizon), Join(path, "horizon"));
    p.options.dt = Positive(NumberOr(params, "dt", path, p.options.dt), Join(path, "dt"));
    if (p.options.horizon <= 1) throw ConfigError(Join(path, "horizon"), "must exceed the unit pulse length");
    if (p.options.horizon / p.options.dt > 1e6) throw ConfigError(Join(path, "dt"), "more than 1e6 samples");
    return p;
  }
  throw ConfigError("job", "unknown job '" + job +
                               "' (small_gain, certify_srg, certify_iqc, simulate, srg_sample, arctan_experiment)");
}

std::optional<std::filesystem::path> OptionalPath(const json& j, const std::string& key,
                                                  const std::string& path) {
  if (!j.contains(key)) return std::nullopt;
  const std::string s = String(j, key, path);
  if (s.empty()) throw ConfigError(Join(path, key), "must not be empty");
  return std::filesystem::path(s);
}

}  // namespace

JobConfig ParseConfig(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  CheckKeys(doc, "", {"job", "seed", "timestamp", "systems", "parameters", "outputs", "description"});
  JobConfig cfg;
  cfg.job = String(doc, "job", "");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected an unsigned integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  cfg.timestamp = StringOr(doc, "timestamp", "", "unspecified");

  const json empty = json::object();
  const json& systems = doc.contains("systems") ? doc.at("systems") : empty;
  RequireObject(systems, "systems");
  SystemBuilder builder(systems);
  for (const auto& [name, entry] : systems.items()) {
    try {
      cfg.systems.emplace(name, builder.Get(name, Join("systems", name)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(Join("systems", name), e.what());
    }
  }

  const json& params = doc.contains("parameters") ? doc.at("parameters") : empty;
  cfg.parameters = ParseParameters(cfg, params, base_dir);

  if (doc.contains("outputs")) {
    const json& out = doc.at("outputs");
    CheckKeys(out, "outputs", {"certificate", "csv", "svg"});
    cfg.outputs.certificate = OptionalPath(out, "certificate", "outputs");
    cfg.outputs.csv = OptionalPath(out, "csv", "outputs");
    cfg.outputs.svg = OptionalPath(out, "svg", "outputs");
  }
  return cfg;
}

JobConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str(), path.parent_path());
}

Primitive ParseRegionLiteral(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("region", std::string("invalid JSON: ") + e.what());
  }
  return ParsePrimitive(j, "region");
}

}  // namespace incstab
