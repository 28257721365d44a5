#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepfp/errors.hpp"
#include "sepfp/solver.hpp"

namespace sepfp {
namespace io {

using nlohmann::json;

inline constexpr int kProblemFileVersion = 1;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

inline const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline Vector parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of reals");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

// matrices are arrays of rows (row-major order)
inline Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(row_path, "ragged or non-array row");
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

}  // namespace detail

inline json to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline json to_json(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

inline json to_json(const HalfSpace& h) {
  return json{{"normal", to_json(h.normal)}, {"offset", h.offset}};
}

inline json to_json(const ConvexSet& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return json{{"variant", "whole_space"}, {"dim", v.dim}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return json{{"variant", "box"}, {"lower", to_json(v.lower)}, {"upper", to_json(v.upper)}};
        } else if constexpr (std::is_same_v<T, Ball>) {
          return json{
              {"variant", "ball"}, {"center", to_json(v.center)}, {"radius", v.radius}};
        } else if constexpr (std::is_same_v<T, HalfSpaceIntersection>) {
          json hs = json::array();
          for (const auto& h : v.halfspaces) hs.push_back(to_json(h));
          return json{{"variant", "halfspace_intersection"}, {"halfspaces", hs}};
        } else {
          return json{{"variant", "affine_subspace"},
                      {"basis", to_json(v.basis)},
                      {"offset", to_json(v.offset)}};
        }
      },
      s);
}

inline ConvexSet parse_set(const json& j, const std::string& path) {
  const std::string variant = detail::text(detail::member(j, path, "variant"), path + ".variant");
  if (variant == "whole_space") {
    return WholeSpace{detail::integer(detail::member(j, path, "dim"), path + ".dim")};
  }
  if (variant == "box") {
    return Box{detail::parse_vector(detail::member(j, path, "lower"), path + ".lower"),
               detail::parse_vector(detail::member(j, path, "upper"), path + ".upper")};
  }
  if (variant == "ball") {
    return Ball{detail::parse_vector(detail::member(j, path, "center"), path + ".center"),
                detail::number(detail::member(j, path, "radius"), path + ".radius")};
  }
  if (variant == "halfspace_intersection") {
    const json& hs = detail::member(j, path, "halfspaces");
    if (!hs.is_array() || hs.empty()) detail::fail(path + ".halfspaces", "expected nonempty array");
    HalfSpaceIntersection out;
    for (size_t i = 0; i < hs.size(); ++i) {
      const std::string hp = path + ".halfspaces[" + std::to_string(i) + "]";
      out.halfspaces.push_back(
          HalfSpace{detail::parse_vector(detail::member(hs[i], hp, "normal"), hp + ".normal"),
                    detail::number(detail::member(hs[i], hp, "offset"), hp + ".offset")});
    }
    return out;
  }
  if (variant == "affine_subspace") {
    return AffineSubspace{
        detail::parse_matrix(detail::member(j, path, "basis"), path + ".basis"),
        detail::parse_vector(detail::member(j, path, "offset"), path + ".offset")};
  }
  detail::fail(path + ".variant", "unknown set variant '" + variant + "'");
}

inline json to_json(const Schedule& s) {
  switch (s.rule) {
    case Schedule::Rule::constant:
      return json{{"rule", "constant"}, {"a", s.a}};
    case Schedule::Rule::harmonic:
      return json{{"rule", "harmonic"}, {"a", s.a}};
    case Schedule::Rule::inverse_square:
      return json{{"rule", "inverse_square"}, {"a", s.a}};
    case Schedule::Rule::geometric:
      return json{{"rule", "geometric"}, {"a", s.a}, {"rho", s.rho}};
  }
  return {};
}

inline Schedule parse_schedule(const json& j, const std::string& path) {
  const std::string rule = detail::text(detail::member(j, path, "rule"), path + ".rule");
  const double a = detail::number(detail::member(j, path, "a"), path + ".a");
  if (rule == "constant") return Schedule::constant(a);
  if (rule == "harmonic") return Schedule::harmonic(a);
  if (rule == "inverse_square") return Schedule::inverse_square(a);
  if (rule == "geometric") {
    return Schedule::geometric(a, detail::number(detail::member(j, path, "rho"), path + ".rho"));
  }
  detail::fail(path + ".rule", "unknown schedule rule '" + rule + "'");
}

inline json to_json(const XiFunction& xi) {
  if (xi.kind == XiFunction::Kind::linear) return json{{"variant", "linear"}, {"c", xi.param}};
  return json{{"variant", "piecewise_quad"}, {"m", xi.param}};
}

inline XiFunction parse_xi(const json& j, const std::string& path) {
  const std::string variant = detail::text(detail::member(j, path, "variant"), path + ".variant");
  if (variant == "linear") {
    return XiFunction::linear(detail::number(detail::member(j, path, "c"), path + ".c"));
  }
  if (variant == "piecewise_quad") {
    return XiFunction::piecewise_quad(detail::number(detail::member(j, path, "m"), path + ".m"));
  }
  detail::fail(path + ".variant", "unknown xi variant '" + variant + "'");
}

inline json to_json(const Bifunction& f) {
  switch (f.family) {
    case BifunctionFamily::monotone_affine:
      return json{
          {"family", "monotone_affine"}, {"matrix", to_json(f.w)}, {"vector", to_json(f.v)}};
    case BifunctionFamily::convex_difference:
      return json{
          {"family", "convex_difference"}, {"matrix", to_json(f.w)}, {"vector", to_json(f.v)}};
    case BifunctionFamily::zero:
      return json{{"family", "zero"}};
  }
  return {};
}

// the domain is the enclosing instance's C (for f) or Q (for g)
inline Bifunction parse_bifunction(const json& j, const std::string& path, ConvexSet domain) {
  const std::string family = detail::text(detail::member(j, path, "family"), path + ".family");
  if (family == "zero") return Bifunction::zero(std::move(domain));
  const Matrix m = detail::parse_matrix(detail::member(j, path, "matrix"), path + ".matrix");
  const Vector v = detail::parse_vector(detail::member(j, path, "vector"), path + ".vector");
  if (family == "monotone_affine") return Bifunction::monotone_affine(m, v, std::move(domain));
  if (family == "convex_difference") return Bifunction::convex_difference(m, v, std::move(domain));
  detail::fail(path + ".family", "unknown bifunction family '" + family + "'");
}

inline json to_json(const MapOp& op) {
  switch (op.kind) {
    case MapOp::Kind::affine:
      return json{{"map", "affine"}, {"matrix", to_json(op.a)}, {"vector", to_json(op.b)}};
    case MapOp::Kind::projection:
      return json{{"map", "projection"}, {"set", to_json(op.set)}};
    case MapOp::Kind::negation:
      return json{{"map", "negation"}};
    case MapOp::Kind::composite: {
      json maps = json::array();
      for (const auto& child : op.children) maps.push_back(to_json(child));
      return json{{"map", "composite"}, {"maps", maps}};
    }
  }
  return {};
}

inline MapOp parse_map(const json& j, const std::string& path) {
  const std::string kind = detail::text(detail::member(j, path, "map"), path + ".map");
  if (kind == "affine") {
    return MapOp::affine(detail::parse_matrix(detail::member(j, path, "matrix"), path + ".matrix"),
                         detail::parse_vector(detail::member(j, path, "vector"), path + ".vector"));
  }
  if (kind == "projection") {
    return MapOp::projection(parse_set(detail::member(j, path, "set"), path + ".set"));
  }
  if (kind == "negation") return MapOp::negation();
  if (kind == "composite") {
    const json& maps = detail::member(j, path, "maps");
    if (!maps.is_array()) detail::fail(path + ".maps", "expected an array");
    std::vector<MapOp> children;
    for (size_t i = 0; i < maps.size(); ++i) {
      children.push_back(parse_map(maps[i], path + ".maps[" + std::to_string(i) + "]"));
    }
    return MapOp::composite(std::move(children));
  }
  detail::fail(path + ".map", "unknown map kind '" + kind + "'");
}

inline json to_json(const MappingSpec& s) {
  return json{{"map", to_json(s.map)},           {"k", s.k},
              {"lambda", to_json(s.lambda)},     {"mu", to_json(s.mu)},
              {"xi", to_json(s.xi)},             {"lipschitz_theta", s.lipschitz_theta}};
}

inline MappingSpec parse_mapping(const json& j, const std::string& path) {
  MappingSpec s;
  s.map = parse_map(detail::member(j, path, "map"), path + ".map");
  s.k = detail::number(detail::member(j, path, "k"), path + ".k");
  s.lambda = parse_schedule(detail::member(j, path, "lambda"), path + ".lambda");
  s.mu = parse_schedule(detail::member(j, path, "mu"), path + ".mu");
  s.xi = parse_xi(detail::member(j, path, "xi"), path + ".xi");
  if (j.contains("lipschitz_theta")) {
    s.lipschitz_theta = detail::number(j["lipschitz_theta"], path + ".lipschitz_theta");
  } else {
    const auto fallback = default_lipschitz_theta(s.map);
    if (!fallback) detail::fail(path, "composite mappings require lipschitz_theta");
    s.lipschitz_theta = *fallback;
  }
  return s;
}

inline json to_json(const SolverConfig& c) {
  json j{{"gamma", c.gamma},
         {"r", to_json(c.r_schedule)},
         {"s", to_json(c.s_schedule)},
         {"alpha", to_json(c.alpha_schedule)},
         {"tol_residual", c.tol_residual},
         {"max_iter", c.max_iter},
         {"mode", std::string(to_string(c.mode))},
         {"seed", c.seed}};
  if (c.d_bound_auto) {
    j["d_bound"] = "auto";
  } else {
    j["d_bound"] = c.d_bound;
  }
  return j;
}

inline json to_json(const ProblemInstance& p, const SolverConfig& config, const Vector& x1) {
  json fs = json::array(), gs = json::array(), as = json::array(), ss = json::array();
  for (const auto& fi : p.f) fs.push_back(to_json(fi));
  for (const auto& gi : p.g) gs.push_back(to_json(gi));
  for (const auto& ai : p.a) as.push_back(to_json(Matrix(ai)));
  for (const auto& si : p.s) ss.push_back(to_json(si));
  return json{{"version", kProblemFileVersion},
              {"dim_h1", p.dim_h1},
              {"dim_h2", p.dim_h2},
              {"C", to_json(p.c)},
              {"Q", to_json(p.q)},
              {"f", fs},
              {"g", gs},
              {"A", as},
              {"S", ss},
              {"config", to_json(config)},
              {"x1", to_json(x1)}};
}

struct LoadedProblem {
  ProblemInstance problem;
  SolverConfig config;
  Vector x1;
};

// Parse without enforcing the admissibility conditions; gamma/d_bound
// "auto" markers are resolved here (gamma -> 0.9/L).
inline LoadedProblem parse_problem(const json& root) {
  LoadedProblem out;
  const std::string top = "$";
  const long version = detail::integer(detail::member(root, top, "version"), "$.version");
  if (version != kProblemFileVersion) detail::fail("$.version", "unsupported version");

  out.problem.dim_h1 = detail::integer(detail::member(root, top, "dim_h1"), "$.dim_h1");
  out.problem.dim_h2 = detail::integer(detail::member(root, top, "dim_h2"), "$.dim_h2");
  out.problem.c = parse_set(detail::member(root, top, "C"), "$.C");
  out.problem.q = parse_set(detail::member(root, top, "Q"), "$.Q");

  const json& fs = detail::member(root, top, "f");
  const json& gs = detail::member(root, top, "g");
  const json& as = detail::member(root, top, "A");
  const json& ss = detail::member(root, top, "S");
  if (!fs.is_array() || !gs.is_array() || !as.is_array() || !ss.is_array()) {
    detail::fail("$", "f, g, A, S must be arrays");
  }
  for (size_t i = 0; i < fs.size(); ++i) {
    out.problem.f.push_back(
        parse_bifunction(fs[i], "$.f[" + std::to_string(i) + "]", out.problem.c));
  }
  for (size_t i = 0; i < gs.size(); ++i) {
    out.problem.g.push_back(
        parse_bifunction(gs[i], "$.g[" + std::to_string(i) + "]", out.problem.q));
  }
  for (size_t i = 0; i < as.size(); ++i) {
    out.problem.a.push_back(detail::parse_matrix(as[i], "$.A[" + std::to_string(i) + "]"));
  }
  for (size_t i = 0; i < ss.size(); ++i) {
    out.problem.s.push_back(parse_mapping(ss[i], "$.S[" + std::to_string(i) + "]"));
  }

  const json& cfg = detail::member(root, top, "config");
  const std::string cp = "$.config";
  const json& gamma = detail::member(cfg, cp, "gamma");
  if (gamma.is_string() && gamma.get<std::string>() == "auto") {
    const SpectralBound bound = spectral_bound(out.problem.a);
    out.config.gamma = bound.max_bound > 0.0 ? 0.9 / bound.max_bound : 1.0;
  } else {
    out.config.gamma = detail::number(gamma, cp + ".gamma");
  }
  out.config.r_schedule = parse_schedule(detail::member(cfg, cp, "r"), cp + ".r");
  out.config.s_schedule = parse_schedule(detail::member(cfg, cp, "s"), cp + ".s");
  out.config.alpha_schedule = parse_schedule(detail::member(cfg, cp, "alpha"), cp + ".alpha");
  const json& dbound = detail::member(cfg, cp, "d_bound");
  if (dbound.is_string() && dbound.get<std::string>() == "auto") {
    out.config.d_bound_auto = true;
  } else {
    out.config.d_bound_auto = false;
    out.config.d_bound = detail::number(dbound, cp + ".d_bound");
  }
  if (cfg.contains("tol_residual")) {
    out.config.tol_residual = detail::number(cfg["tol_residual"], cp + ".tol_residual");
  }
  if (cfg.contains("max_iter")) {
    out.config.max_iter = detail::integer(cfg["max_iter"], cp + ".max_iter");
  }
  if (cfg.contains("seed")) {
    out.config.seed = static_cast<std::uint64_t>(detail::integer(cfg["seed"], cp + ".seed"));
  }
  const std::string mode = detail::text(detail::member(cfg, cp, "mode"), cp + ".mode");
  if (mode == "full") {
    out.config.mode = SolverMode::full;
  } else if (mode == "nonexpansive") {
    out.config.mode = SolverMode::nonexpansive;
  } else if (mode == "identity_operator") {
    out.config.mode = SolverMode::identity_operator;
  } else {
    detail::fail(cp + ".mode", "unknown mode '" + mode + "'");
  }

  out.x1 = detail::parse_vector(detail::member(root, top, "x1"), "$.x1");
  return out;
}

// Load and fully validate: structural instance checks plus the
// admissibility report, which fails the load when any condition breaks.
inline LoadedProblem load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  LoadedProblem out = parse_problem(root);
  try {
    validate_instance(out.problem);
  } catch (const ArgumentError& e) {
    throw ParseError(path + ": " + e.what());
  }
  const ConfigReport report = validate_config(out.problem, out.config);
  if (!report.pass()) {
    std::ostringstream os;
    os << path << ": condition validation failed:";
    for (const auto& c : report.checks) {
      if (!c.pass) os << "\n  [" << c.condition << "] " << c.detail;
    }
    throw ParseError(os.str());
  }
  return out;
}

inline void save(const std::string& path, const ProblemInstance& p, const SolverConfig& c,
                 const Vector& x1) {
  std::ofstream outf(path);
  if (!outf) throw ParseError(path + ": cannot open for writing");
  outf << to_json(p, c, x1).dump(2) << "\n";
}

}  // namespace io
}  // namespace sepfp
