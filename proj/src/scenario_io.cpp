#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "optflow/scenario.hpp"

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---- writing ---------------------------------------------------------------

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string vec(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v(i));
  return out + "]";
}

std::string rows(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) out += (r ? ", " : "") + vec(m.row(r).transpose());
  return out + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          out += fmt::format("\\x{:02x}", static_cast<unsigned>(static_cast<unsigned char>(ch)));
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

std::string arcs(const DigraphSnapshot& g) {
  std::string out = "[";
  bool first = true;
  for (const Arc& a : g.arcs()) {
    out += fmt::format("{}[{}, {}]", first ? "" : ", ", a.from, a.to);
    first = false;
  }
  return out + "]";
}

std::string halfspace(const Halfspace& h) { return fmt::format("{{normal: {}, offset: {}}}", vec(h.normal), num(h.offset)); }

std::string set_text(const ConvexSet& set) {
  return std::visit(
      overloaded{
          [](const Halfspace& h) {
            return fmt::format("{{type: halfspace, normal: {}, offset: {}}}", vec(h.normal), num(h.offset));
          },
          [](const Ball& b) { return fmt::format("{{type: ball, center: {}, radius: {}}}", vec(b.center), num(b.radius)); },
          [](const Box& b) { return fmt::format("{{type: box, lo: {}, hi: {}}}", vec(b.lo), vec(b.hi)); },
          [](const Affine& a) {
            std::string basis = "[";
            for (Eigen::Index c = 0; c < a.basis.cols(); ++c) basis += (c ? ", " : "") + vec(a.basis.col(c));
            return fmt::format("{{type: affine, anchor: {}, basis: {}]}}", vec(a.anchor), basis);
          },
          [](const Polyhedron& p) {
            std::string faces = "[";
            for (std::size_t k = 0; k < p.faces.size(); ++k) faces += (k ? ", " : "") + halfspace(p.faces[k]);
            return fmt::format("{{type: polyhedron, faces: {}]}}", faces);
          },
          [](const Intersection& in) {
            std::string members = "[";
            for (std::size_t k = 0; k < in.members.size(); ++k) members += (k ? ", " : "") + set_text(in.members[k]);
            return fmt::format("{{type: intersection, tolerance: {}, max_iterations: {}, members: {}]}}",
                               num(in.tolerance), in.max_iterations, members);
          },
      },
      set.shape);
}

std::string graph_list(const std::vector<DigraphSnapshot>& graphs) {
  std::string out;
  for (const auto& g : graphs) out += "    - " + arcs(g) + "\n";
  return out;
}

std::string topology_text(const TopologySpec& spec) {
  std::string out = "topology:\n";
  const std::string common = fmt::format("  dwell: {}\n  horizon: {}\n", num(spec.dwell), num(spec.horizon));
  std::visit(overloaded{
                 [&](const StaticTopology& s) {
                   out += "  kind: static\n" + common + "  graph: " + arcs(s.graph) + "\n";
                 },
                 [&](const PeriodicCycleTopology& s) {
                   out += "  kind: periodic_cycle\n" + common;
                   out += fmt::format("  piece_length: {}\n  graphs:\n", num(s.piece_length)) + graph_list(s.graphs);
                 },
                 [&](const GrowingIntervalsTopology& s) {
                   out += "  kind: growing_intervals\n" + common;
                   out += fmt::format("  base: {}\n  growth: {}\n  intervals: {}\n  graphs:\n", num(s.base),
                                      num(s.growth), s.intervals) +
                          graph_list(s.graphs);
                 },
                 [&](const ScriptedTopology& s) {
                   out += "  kind: scripted\n" + common + "  pieces:\n";
                   for (const auto& p : s.pieces) {
                     out += fmt::format("    - {{start: {}, arcs: {}}}\n", num(p.start), arcs(p.graph));
                   }
                 },
                 [&](const RandomDwellTopology& s) {
                   out += "  kind: random_dwell\n" + common;
                   out += fmt::format(
                       "  seed: {}\n  arc_probability: {}\n  palette_size: {}\n  min_length: {}\n  max_length: {}\n"
                       "  symmetric: {}\n",
                       s.seed, num(s.arc_probability), s.palette_size, num(s.min_length), num(s.max_length),
                       s.symmetric ? "true" : "false");
                 },
             },
             spec.kind);
  return out;
}

std::string weights_text(const WeightSpec& spec) {
  std::string out = "weights:\n";
  const std::string bounds = fmt::format("  lower: {}\n  upper: {}\n", num(spec.lower), num(spec.upper));
  std::visit(overloaded{
                 [&](const ConstantWeights& w) {
                   out += "  kind: constant\n" + bounds + "  values: " + rows(w.values) + "\n";
                 },
                 [&](const OscillatingWeights& w) {
                   out += "  kind: oscillating\n" + bounds;
                   out += "  offset: " + rows(w.offset) + "\n";
                   out += "  amplitude: " + rows(w.amplitude) + "\n";
                   out += "  frequency: " + rows(w.frequency) + "\n";
                   out += "  phase: " + rows(w.phase) + "\n";
                 },
                 [&](const DistanceWeights&) { out += "  kind: distance\n" + bounds; },
             },
             spec.kind);
  return out;
}

// ---- reading ---------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw InputError(path + ": " + message);
}

void allow_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys) {
  if (!node.IsMap()) fail(path, "expected a mapping");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail(path, "unknown key '" + key + "'");
  }
}

YAML::Node need(const YAML::Node& node, const char* key, const std::string& path) {
  YAML::Node child = node[key];
  if (!child) fail(path, std::string("missing key '") + key + "'");
  return child;
}

double to_double(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a number");
  const std::string& text = node.Scalar();
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    fail(path, "'" + text + "' is not a number");
  }
  return v;
}

std::uint64_t to_uint(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a non-negative integer");
  const std::string& text = node.Scalar();
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text.front() == '-' || end != text.c_str() + text.size() || errno == ERANGE) {
    fail(path, "'" + text + "' is not a non-negative integer");
  }
  return v;
}

bool to_bool(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar() && node.Scalar() == "true") return true;
  if (node.IsScalar() && node.Scalar() == "false") return false;
  fail(path, "expected true or false");
}

std::string to_string(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a string");
  return node.Scalar();
}

Vector to_vector(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = to_double(node[i], fmt::format("{}[{}]", path, i));
  }
  return v;
}

// Rows of equal length.
Eigen::MatrixXd to_rows(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of rows");
  std::vector<Vector> r;
  for (std::size_t i = 0; i < node.size(); ++i) r.push_back(to_vector(node[i], fmt::format("{}[{}]", path, i)));
  const Eigen::Index cols = r.empty() ? 0 : r.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), cols);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].size() != cols) fail(path, "rows have different lengths");
    m.row(static_cast<Eigen::Index>(i)) = r[i].transpose();
  }
  return m;
}

DigraphSnapshot to_graph(const YAML::Node& node, std::size_t n, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of [from, to] arcs");
  std::vector<Arc> out;
  for (std::size_t k = 0; k < node.size(); ++k) {
    const std::string at = fmt::format("{}[{}]", path, k);
    if (!node[k].IsSequence() || node[k].size() != 2) fail(at, "arc must be [from, to]");
    out.push_back(Arc{to_uint(node[k][0], at), to_uint(node[k][1], at)});
  }
  try {
    return DigraphSnapshot(n, std::move(out));
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

std::vector<DigraphSnapshot> to_graphs(const YAML::Node& node, std::size_t n, const std::string& path) {
  if (!node.IsSequence()) fail(path, "expected a list of arc lists");
  std::vector<DigraphSnapshot> out;
  for (std::size_t k = 0; k < node.size(); ++k) out.push_back(to_graph(node[k], n, fmt::format("{}[{}]", path, k)));
  return out;
}

Halfspace to_halfspace(const YAML::Node& node, const std::string& path) {
  return Halfspace{to_vector(need(node, "normal", path), path + ".normal"),
                   to_double(need(node, "offset", path), path + ".offset")};
}

ConvexSet to_set(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) fail(path, "expected a set mapping");
  const std::string type = to_string(need(node, "type", path), path + ".type");
  if (type == "halfspace") {
    allow_keys(node, path, {"type", "normal", "offset"});
    return to_halfspace(node, path);
  }
  if (type == "ball") {
    allow_keys(node, path, {"type", "center", "radius"});
    return Ball{to_vector(need(node, "center", path), path + ".center"),
                to_double(need(node, "radius", path), path + ".radius")};
  }
  if (type == "box") {
    allow_keys(node, path, {"type", "lo", "hi"});
    return Box{to_vector(need(node, "lo", path), path + ".lo"), to_vector(need(node, "hi", path), path + ".hi")};
  }
  if (type == "affine") {
    allow_keys(node, path, {"type", "anchor", "basis"});
    Vector anchor = to_vector(need(node, "anchor", path), path + ".anchor");
    const Eigen::MatrixXd cols = to_rows(need(node, "basis", path), path + ".basis");
    Eigen::MatrixXd basis = cols.rows() == 0 ? Eigen::MatrixXd(anchor.size(), 0) : Eigen::MatrixXd(cols.transpose());
    return Affine{std::move(anchor), std::move(basis)};
  }
  if (type == "polyhedron") {
    allow_keys(node, path, {"type", "faces"});
    const YAML::Node faces = need(node, "faces", path);
    if (!faces.IsSequence()) fail(path + ".faces", "expected a list");
    Polyhedron p;
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const std::string at = fmt::format("{}.faces[{}]", path, k);
      allow_keys(faces[k], at, {"normal", "offset"});
      p.faces.push_back(to_halfspace(faces[k], at));
    }
    return p;
  }
  if (type == "intersection") {
    allow_keys(node, path, {"type", "members", "tolerance", "max_iterations"});
    Intersection in;
    const YAML::Node members = need(node, "members", path);
    if (!members.IsSequence()) fail(path + ".members", "expected a list");
    for (std::size_t k = 0; k < members.size(); ++k) {
      in.members.push_back(to_set(members[k], fmt::format("{}.members[{}]", path, k)));
    }
    if (node["tolerance"]) in.tolerance = to_double(node["tolerance"], path + ".tolerance");
    if (node["max_iterations"]) in.max_iterations = to_uint(node["max_iterations"], path + ".max_iterations");
    return in;
  }
  fail(path + ".type", "unknown set type '" + type + "'");
}

TopologySpec to_topology(const YAML::Node& node, std::size_t n) {
  const std::string path = "topology";
  if (!node.IsMap()) fail(path, "expected a mapping");
  TopologySpec spec;
  const std::string kind = to_string(need(node, "kind", path), path + ".kind");
  spec.dwell = to_double(need(node, "dwell", path), path + ".dwell");
  spec.horizon = to_double(need(node, "horizon", path), path + ".horizon");
  if (kind == "static") {
    allow_keys(node, path, {"kind", "dwell", "horizon", "graph"});
    spec.kind = StaticTopology{to_graph(need(node, "graph", path), n, path + ".graph")};
  } else if (kind == "periodic_cycle") {
    allow_keys(node, path, {"kind", "dwell", "horizon", "piece_length", "graphs"});
    spec.kind = PeriodicCycleTopology{to_graphs(need(node, "graphs", path), n, path + ".graphs"),
                                      to_double(need(node, "piece_length", path), path + ".piece_length")};
  } else if (kind == "growing_intervals") {
    allow_keys(node, path, {"kind", "dwell", "horizon", "base", "growth", "intervals", "graphs"});
    spec.kind = GrowingIntervalsTopology{to_graphs(need(node, "graphs", path), n, path + ".graphs"),
                                         to_double(need(node, "base", path), path + ".base"),
                                         to_double(need(node, "growth", path), path + ".growth"),
                                         to_uint(need(node, "intervals", path), path + ".intervals")};
  } else if (kind == "scripted") {
    allow_keys(node, path, {"kind", "dwell", "horizon", "pieces"});
    const YAML::Node pieces = need(node, "pieces", path);
    if (!pieces.IsSequence()) fail(path + ".pieces", "expected a list");
    ScriptedTopology s;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const std::string at = fmt::format("{}.pieces[{}]", path, k);
      allow_keys(pieces[k], at, {"start", "arcs"});
      s.pieces.push_back(TopologyPiece{to_double(need(pieces[k], "start", at), at + ".start"),
                                       to_graph(need(pieces[k], "arcs", at), n, at + ".arcs")});
    }
    spec.kind = std::move(s);
  } else if (kind == "random_dwell") {
    allow_keys(node, path,
               {"kind", "dwell", "horizon", "seed", "arc_probability", "palette_size", "min_length", "max_length",
                "symmetric"});
    RandomDwellTopology r;
    r.seed = to_uint(need(node, "seed", path), path + ".seed");
    r.arc_probability = to_double(need(node, "arc_probability", path), path + ".arc_probability");
    r.palette_size = to_uint(need(node, "palette_size", path), path + ".palette_size");
    r.min_length = to_double(need(node, "min_length", path), path + ".min_length");
    r.max_length = to_double(need(node, "max_length", path), path + ".max_length");
    r.symmetric = to_bool(need(node, "symmetric", path), path + ".symmetric");
    spec.kind = r;
  } else {
    fail(path + ".kind", "unknown topology kind '" + kind + "'");
  }
  return spec;
}

WeightSpec to_weights(const YAML::Node& node) {
  const std::string path = "weights";
  if (!node.IsMap()) fail(path, "expected a mapping");
  WeightSpec spec;
  const std::string kind = to_string(need(node, "kind", path), path + ".kind");
  spec.lower = to_double(need(node, "lower", path), path + ".lower");
  spec.upper = to_double(need(node, "upper", path), path + ".upper");
  if (kind == "constant") {
    allow_keys(node, path, {"kind", "lower", "upper", "values"});
    spec.kind = ConstantWeights{to_rows(need(node, "values", path), path + ".values")};
  } else if (kind == "oscillating") {
    allow_keys(node, path, {"kind", "lower", "upper", "offset", "amplitude", "frequency", "phase"});
    spec.kind = OscillatingWeights{to_rows(need(node, "offset", path), path + ".offset"),
                                   to_rows(need(node, "amplitude", path), path + ".amplitude"),
                                   to_rows(need(node, "frequency", path), path + ".frequency"),
                                   to_rows(need(node, "phase", path), path + ".phase")};
  } else if (kind == "distance") {
    allow_keys(node, path, {"kind", "lower", "upper"});
    spec.kind = DistanceWeights{};
  } else {
    fail(path + ".kind", "unknown weight kind '" + kind + "'");
  }
  return spec;
}

}  // namespace

std::string to_yaml(const Scenario& s) {
  std::string out;
  out += fmt::format("problem:\n  m: {}\n  N: {}\n  sets:\n", s.dimension, s.agents);
  for (const auto& set : s.sets) out += "    - " + set_text(set) + "\n";
  out += topology_text(s.topology);
  out += weights_text(s.weights);
  out += fmt::format("gains:\n  lower: {}\n", num(s.gains.lower));
  if (!s.gains.values.empty()) {
    out += "  values: [";
    for (std::size_t i = 0; i < s.gains.values.size(); ++i) out += (i ? ", " : "") + num(s.gains.values[i]);
    out += "]\n";
  }
  out += "initial:\n  states:\n";
  for (Eigen::Index i = 0; i < s.initial.cols(); ++i) out += "    - " + vec(s.initial.col(i)) + "\n";
  out += fmt::format("integrator:\n  method: {}\n  step: {}\n  t_end: {}\n",
                     s.integrator.method == Method::RK4 ? "rk4" : "euler", num(s.integrator.step),
                     num(s.integrator.t_end));
  out += fmt::format("seed: {}\n", s.seed);
  if (!s.metadata.empty()) {
    out += "metadata:\n";
    for (const auto& [key, value] : s.metadata) out += "  " + quoted(key) + ": " + quoted(value) + "\n";
  }
  return out;
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("scenario is not valid YAML: ") + e.what());
  }
  allow_keys(root, "scenario", {"problem", "topology", "weights", "gains", "initial", "integrator", "seed", "metadata"});

  Scenario s;
  const YAML::Node problem = need(root, "problem", "scenario");
  allow_keys(problem, "problem", {"m", "N", "sets"});
  s.dimension = to_uint(need(problem, "m", "problem"), "problem.m");
  s.agents = to_uint(need(problem, "N", "problem"), "problem.N");
  const YAML::Node sets = need(problem, "sets", "problem");
  if (!sets.IsSequence()) fail("problem.sets", "expected a list");
  for (std::size_t i = 0; i < sets.size(); ++i) s.sets.push_back(to_set(sets[i], fmt::format("problem.sets[{}]", i)));

  s.topology = to_topology(need(root, "topology", "scenario"), s.agents);
  s.weights = to_weights(need(root, "weights", "scenario"));

  if (const YAML::Node gains = root["gains"]) {
    allow_keys(gains, "gains", {"lower", "values"});
    if (gains["lower"]) s.gains.lower = to_double(gains["lower"], "gains.lower");
    if (gains["values"]) {
      const Vector v = to_vector(gains["values"], "gains.values");
      s.gains.values.assign(v.data(), v.data() + v.size());
    }
  }

  const YAML::Node initial = need(root, "initial", "scenario");
  allow_keys(initial, "initial", {"states"});
  const Eigen::MatrixXd states = to_rows(need(initial, "states", "initial"), "initial.states");
  s.initial = states.transpose();

  const YAML::Node integrator = need(root, "integrator", "scenario");
  allow_keys(integrator, "integrator", {"method", "step", "t_end"});
  const std::string method = to_string(need(integrator, "method", "integrator"), "integrator.method");
  if (method == "rk4") {
    s.integrator.method = Method::RK4;
  } else if (method == "euler") {
    s.integrator.method = Method::Euler;
  } else {
    fail("integrator.method", "expected rk4 or euler");
  }
  s.integrator.step = to_double(need(integrator, "step", "integrator"), "integrator.step");
  s.integrator.t_end = to_double(need(integrator, "t_end", "integrator"), "integrator.t_end");

  s.seed = to_uint(need(root, "seed", "scenario"), "seed");
  if (const YAML::Node meta = root["metadata"]) {
    if (!meta.IsMap()) fail("metadata", "expected a mapping");
    for (const auto& kv : meta) {
      s.metadata[kv.first.as<std::string>()] = to_string(kv.second, "metadata." + kv.first.as<std::string>());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write scenario file " + path.string());
  out << to_yaml(s);
  if (!out) throw InputError("failed writing scenario file " + path.string());
}

std::string scenario_hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_yaml(s)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace optflow
