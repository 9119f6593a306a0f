#include "vanish/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vanish/errors.hpp"

namespace vanish {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const int line = at.IsDefined() && !at.Mark().is_null() ? at.Mark().line + 1 : 1;
    fail_line(line, message);
  }

  [[noreturn]] void fail_line(int line, const std::string& message) const {
    std::ostringstream msg;
    msg << source_ << ':' << line << ": " << message;
    throw ValidationError(msg.str());
  }

  YAML::Node require(const YAML::Node& parent, const std::string& key) const {
    YAML::Node child = parent[key];
    if (!child.IsDefined() || child.IsNull()) fail(parent, "missing field '" + key + "'");
    return child;
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    double v = 0.0;
    try {
      v = node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, what + " must be a number, got '" + node.Scalar() + "'");
    }
    if (!std::isfinite(v)) fail(node, what + " is not finite");
    return v;
  }

  YAML::Node list(const YAML::Node& node, std::size_t size, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    if (size != 0 && node.size() != size) {
      std::ostringstream msg;
      msg << what << " has " << node.size() << " entries, expected " << size;
      fail(node, msg.str());
    }
    return node;
  }

  std::vector<double> vector(const YAML::Node& node, std::size_t size, const std::string& what) const {
    list(node, size, what);
    std::vector<double> out;
    for (std::size_t k = 0; k < node.size(); ++k) out.push_back(number(node[k], what));
    return out;
  }

  Matrix matrix(const YAML::Node& node, std::size_t rows, std::size_t cols, const std::string& what) const {
    list(node, rows, what);
    if (node.size() == 0) fail(node, what + " is empty");
    if (cols == 0) {
      if (!node[0].IsSequence()) fail(node[0], what + " rows must be lists");
      cols = node[0].size();
    }
    Matrix m(node.size(), cols);
    for (std::size_t r = 0; r < node.size(); ++r) {
      const std::vector<double> row = vector(node[r], cols, what + " row");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
  }

  std::vector<std::string> names(const YAML::Node& root, const std::string& key) const {
    const YAML::Node node = list(require(root, key), 0, key);
    if (node.size() == 0) fail(node, key + " is empty");
    std::vector<std::string> out;
    for (const auto& n : node) {
      if (!n.IsScalar()) fail(n, key + " entries must be names");
      out.push_back(n.Scalar());
    }
    return out;
  }

  Evaluation evaluation(const YAML::Node& root) const {
    const YAML::Node node = require(root, "evaluation");
    if (!node.IsMap()) fail(node, "evaluation must be a mapping");
    const YAML::Node kind_node = require(node, "kind");
    const std::string kind = kind_node.Scalar();
    double tail = Evaluation::kDefaultTailTolerance;
    if (node["tail_tolerance"]) tail = number(node["tail_tolerance"], "tail_tolerance");
    try {
      if (kind == "exponential") return Evaluation::exponential(number(require(node, "rho"), "rho"), tail);
      if (kind == "tabulated") {
        return Evaluation::tabulated(vector(require(node, "knots"), 0, "knots"),
                                     vector(require(node, "densities"), 0, "densities"), tail);
      }
    } catch (const ValidationError& e) {
      fail(node, e.what());
    }
    fail(kind_node, "unknown evaluation kind '" + kind + "' (expected exponential or tabulated)");
  }

  YAML::Node load(const std::string& text) const {
    try {
      YAML::Node root = YAML::Load(text);
      if (!root.IsMap()) fail_line(1, "expected a mapping at the top level");
      return root;
    } catch (const YAML::ParserException& e) {
      fail_line(e.mark.line + 1, e.msg);
    }
  }

 private:
  std::string source_;
};

diffgame::State state(const Reader& r, const YAML::Node& node, std::size_t dim, const std::string& what) {
  const std::vector<double> v = r.vector(node, dim, what);
  diffgame::State s{};
  std::copy(v.begin(), v.end(), s.begin());
  return s;
}

std::vector<std::vector<diffgame::State>> state_table(const Reader& r, const YAML::Node& node, std::size_t a,
                                                      std::size_t b, std::size_t dim, const std::string& what) {
  r.list(node, a, what);
  std::vector<std::vector<diffgame::State>> out(a);
  for (std::size_t i = 0; i < a; ++i) {
    r.list(node[i], b, what + " row");
    for (std::size_t j = 0; j < b; ++j) out[i].push_back(state(r, node[i][j], dim, what + " entry"));
  }
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

GameSpec parse_game_spec(const std::string& text, const std::string& source) {
  const Reader r(source);
  const YAML::Node root = r.load(text);
  std::vector<std::string> states = r.names(root, "states");
  std::vector<std::string> actions1 = r.names(root, "actions1");
  std::vector<std::string> actions2 = r.names(root, "actions2");
  const std::size_t s = states.size();
  const std::size_t a = actions1.size();
  const std::size_t b = actions2.size();

  const YAML::Node payoff_node = r.list(r.require(root, "payoff"), s, "payoff");
  std::vector<Matrix> payoff;
  for (std::size_t z = 0; z < s; ++z) payoff.push_back(r.matrix(payoff_node[z], a, b, "payoff[" + states[z] + "]"));

  const YAML::Node rates_node = r.list(r.require(root, "rates"), a, "rates");
  std::vector<RateMatrix> rates;
  for (std::size_t i = 0; i < a; ++i) {
    r.list(rates_node[i], b, "rates row");
    for (std::size_t j = 0; j < b; ++j) {
      const YAML::Node q_node = rates_node[i][j];
      RateMatrix q(r.matrix(q_node, s, s, "rates"));
      if (auto bad = check_rate_matrix(q)) {
        r.fail(q_node, "rates q(" + actions1[i] + "," + actions2[j] + "): " + *bad);
      }
      rates.push_back(std::move(q));
    }
  }
  Evaluation evaluation = r.evaluation(root);
  GameSpec spec(std::move(states), std::move(actions1), std::move(actions2), std::move(payoff), std::move(rates),
                std::move(evaluation));
  if (auto violation = validate(spec)) r.fail_line(1, violation->message);
  return spec;
}

GameSpec load_game_spec(const std::string& path) { return parse_game_spec(read_file(path), path); }

diffgame::DiffGameSpec parse_diffgame_spec(const std::string& text, const std::string& source) {
  using namespace diffgame;
  const Reader r(source);
  const YAML::Node root = r.load(text);
  const std::size_t a = r.names(root, "actions1").size();
  const std::size_t b = r.names(root, "actions2").size();

  const YAML::Node box_node = r.require(root, "box");
  Box box{r.vector(r.require(box_node, "lower"), 0, "box lower"), {}};
  if (box.dim() == 0 || box.dim() > kMaxDim) r.fail(box_node, "box must have 1 to 3 coordinates");
  box.upper = r.vector(r.require(box_node, "upper"), box.dim(), "box upper");
  for (std::size_t d = 0; d < box.dim(); ++d) {
    if (!(box.upper[d] > box.lower[d])) r.fail(box_node, "box lower must be below upper in every coordinate");
  }
  const std::size_t dim = box.dim();

  const YAML::Node dyn = r.require(root, "dynamics");
  const YAML::Node family_node = r.require(dyn, "family");
  const std::string family = family_node.Scalar();
  Dynamics f;
  double lip_f = 0.0;
  if (family == "zero") {
    f = zero_dynamics();
  } else if (family == "constant") {
    f = constant_dynamics(state_table(r, r.require(dyn, "b"), a, b, dim, "dynamics b"));
  } else if (family == "linear") {
    const YAML::Node a_node = r.list(r.require(dyn, "a"), a, "dynamics a");
    std::vector<std::vector<Matrix>> coeff(a);
    for (std::size_t i = 0; i < a; ++i) {
      r.list(a_node[i], b, "dynamics a row");
      for (std::size_t j = 0; j < b; ++j) coeff[i].push_back(r.matrix(a_node[i][j], dim, dim, "dynamics a entry"));
    }
    lip_f = lipschitz_linear(coeff);
    f = linear_dynamics(std::move(coeff), state_table(r, r.require(dyn, "b"), a, b, dim, "dynamics b"));
  } else if (family == "separable-control") {
    Matrix drift = r.matrix(r.require(dyn, "drift"), dim, dim, "dynamics drift");
    std::vector<State> u;
    std::vector<State> w;
    const YAML::Node u_node = r.list(r.require(dyn, "u"), a, "dynamics u");
    for (std::size_t i = 0; i < a; ++i) u.push_back(state(r, u_node[i], dim, "dynamics u entry"));
    const YAML::Node w_node = r.list(r.require(dyn, "w"), b, "dynamics w");
    for (std::size_t j = 0; j < b; ++j) w.push_back(state(r, w_node[j], dim, "dynamics w entry"));
    lip_f = norm_inf(drift);
    f = separable_control_dynamics(std::move(drift), std::move(u), std::move(w));
  } else {
    r.fail(family_node, "unknown dynamics family '" + family + "' (expected zero, constant, linear or separable-control)");
  }

  Matrix base = r.matrix(r.require(root, "payoff"), a, b, "payoff");
  std::vector<std::vector<State>> slope;
  if (root["payoff_slope"]) slope = state_table(r, root["payoff_slope"], a, b, dim, "payoff_slope");
  const double lip_g = slope.empty() ? 0.0 : lipschitz_affine_payoff(slope);
  Evaluation evaluation = r.evaluation(root);
  DiffGameSpec spec(std::move(box), a, b, std::move(f), affine_payoff(std::move(base), std::move(slope)), lip_f, lip_g,
                    std::move(evaluation), family);
  if (auto violation = validate(spec)) r.fail_line(1, violation->message);
  return spec;
}

diffgame::DiffGameSpec load_diffgame_spec(const std::string& path) {
  return parse_diffgame_spec(read_file(path), path);
}

Matrix parse_matrix(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.fail_line(e.mark.line + 1, e.msg);
  }
  if (root.IsMap()) root = r.require(root, "matrix");
  return r.matrix(root, 0, 0, "matrix");
}

Matrix load_matrix(const std::string& path) { return parse_matrix(read_file(path), path); }

}  // namespace vanish
