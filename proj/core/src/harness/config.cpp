#include "imuon/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "imuon/errors.hpp"
#include "imuon/polar.hpp"

namespace imuon::harness {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto q = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, q == std::string_view::npos ? std::string_view::npos : q - pos)));
    if (q == std::string_view::npos) break;
    pos = q + 1;
  }
  return out;
}

double to_double(const std::string& s, const std::string& ctx) {
  double v = 0.0;
  const std::string t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(ctx + ": not a finite number: '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& ctx) {
  std::uint64_t v = 0;
  const std::string t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
    throw ConfigError(ctx + ": not a nonnegative integer: '" + s + "'");
  }
  return v;
}

std::size_t to_size(const std::string& s, const std::string& ctx) {
  return static_cast<std::size_t>(to_u64(s, ctx));
}

void require_one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& ctx) {
  for (const char* a : allowed)
    if (v == a) return;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError(ctx + ": '" + v + "' is not one of " + list);
}

// Reads keys of one section, rejecting anything not consumed.
class Section {
 public:
  Section(const pt::ptree& tree, std::string name) : tree_(tree), name_(std::move(name)) {
    for (const auto& kv : tree_) {
      if (!kv.second.empty()) throw ConfigError("[" + name_ + "] nested keys are not supported");
    }
  }

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string ctx(const std::string& key) const { return "[" + name_ + "] " + key; }

  void str(const std::string& key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }
  void num(const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(*v, ctx(key));
  }
  void num(const std::string& key, std::optional<double>& out) {
    if (auto v = get(key)) out = to_double(*v, ctx(key));
  }
  void size(const std::string& key, std::size_t& out) {
    if (auto v = get(key)) out = to_size(*v, ctx(key));
  }
  void u64(const std::string& key, std::uint64_t& out) {
    if (auto v = get(key)) out = to_u64(*v, ctx(key));
  }
  void integer(const std::string& key, int& out) {
    if (auto v = get(key)) out = static_cast<int>(to_u64(*v, ctx(key)));
  }

  void finish() const {
    for (const auto& kv : tree_) {
      if (!seen_.count(kv.first)) throw ConfigError(ctx(kv.first) + ": unknown key");
    }
  }

 private:
  const pt::ptree& tree_;
  std::string name_;
  std::set<std::string> seen_;
};

pt::ptree read_tree(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  return tree;
}

void read_oracle_keys(Section& s, OracleConfig& o, const std::filesystem::path& base_dir) {
  s.str("kind", o.kind);
  s.integer("iterations", o.iterations);
  s.str("normalization", o.normalization);
  s.str("table", o.table);
  s.num("spectrum_floor", o.spectrum_floor);
  s.num("scale_margin", o.scale_margin);
  require_one_of(o.kind, {"exact", "newton_schulz", "muon", "polar_express", "table", "svd"}, s.ctx("kind"));
  require_one_of(o.normalization, {"frobenius", "spectral"}, s.ctx("normalization"));
  if (o.iterations < 1) throw ConfigError(s.ctx("iterations") + ": must be at least 1");
  if (o.kind == "table" && o.table.empty()) throw ConfigError(s.ctx("table") + ": required for kind = table");
  if (!o.table.empty() && !base_dir.empty() && std::filesystem::path(o.table).is_relative()) {
    o.table = (base_dir / o.table).lexically_normal().string();
  }
}

bool has_oracle_keys(const pt::ptree& t) {
  for (const char* k : {"kind", "iterations", "normalization", "table", "spectrum_floor", "scale_margin"}) {
    if (t.count(k)) return true;
  }
  return false;
}

void read_step_keys(Section& s, StepConfig& st) {
  s.str("step", st.kind);
  s.num("gamma", st.gamma);
  s.num("L", st.L);
  s.num("L0", st.L0);
  s.num("L1", st.L1);
  require_one_of(st.kind, {"constant", "adaptive", "glsmooth", "timevarying"}, s.ctx("step"));
  if (!(st.gamma > 0.0)) throw ConfigError(s.ctx("gamma") + ": must be positive");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& ctx) {
  std::vector<std::uint64_t> out;
  for (const auto& t : split(text, ',')) out.push_back(to_u64(t, ctx));
  if (out.empty()) throw ConfigError(ctx + ": empty list");
  return out;
}

RunConfig read_run(const pt::ptree& tree, const std::filesystem::path& base_dir, bool allow_sweep) {
  RunConfig c;
  for (const auto& kv : tree) {
    const std::string& sec = kv.first;
    if (kv.second.empty() && !kv.second.data().empty()) {
      throw ConfigError("key '" + sec + "' outside of any section");
    }
    const bool known = sec == "run" || sec == "problem" || sec == "optimizer" || sec == "oracle" ||
                       (sec.rfind("block.", 0) == 0 && sec.size() > 6) || (allow_sweep && sec == "sweep");
    if (!known) throw ConfigError("unknown section [" + sec + "]");
  }

  if (auto t = tree.get_child_optional("run")) {
    Section s(*t, "run");
    s.size("K", c.K);
    if (auto v = s.get("seeds")) c.seeds = parse_seed_list(*v, s.ctx("seeds"));
    s.str("run_id", c.run_id);
    s.str("output", c.output);
    s.size("eval_every", c.eval_every);
    s.finish();
    if (c.K < 1) throw ConfigError("[run] K: must be at least 1");
    if (c.run_id.empty() || c.run_id.find_first_of(",\"\n") != std::string::npos) {
      throw ConfigError("[run] run_id: must be nonempty without commas or quotes");
    }
  }

  if (auto t = tree.get_child_optional("problem")) {
    Section s(*t, "problem");
    ProblemSpec& p = c.problem;
    s.str("name", p.name);
    s.size("rows", p.rows);
    s.size("cols", p.cols);
    s.size("dim", p.dim);
    s.size("samples", p.samples);
    s.size("classes", p.classes);
    s.size("batch", p.batch);
    s.size("target_rank", p.target_rank);
    s.u64("seed", p.seed);
    s.num("sigma", p.sigma);
    s.str("norm", p.norm);
    s.str("target", p.target);
    s.str("init", p.init);
    s.num("init_scale", p.init_scale);
    s.num("x0_norm", p.x0_norm);
    s.num("margin", p.margin);
    s.num("teacher_scale", p.teacher_scale);
    s.num("L", p.L);
    s.finish();
    require_one_of(p.name, {"quadratic", "logistic", "factorization", "quartic"}, s.ctx("name"));
    require_one_of(p.norm, {"spectral", "linf", "euclidean"}, s.ctx("norm"));
    require_one_of(p.target, {"random", "zero"}, s.ctx("target"));
    require_one_of(p.init, {"zero", "identity", "random"}, s.ctx("init"));
    if (p.sigma < 0.0) throw ConfigError("[problem] sigma: must be nonnegative");
  }

  if (auto t = tree.get_child_optional("optimizer")) {
    Section s(*t, "optimizer");
    s.str("variant", c.variant);
    read_step_keys(s, c.step);
    s.str("momentum", c.momentum);
    s.num("alpha", c.alpha);
    s.str("momentum_init", c.momentum_init);
    s.finish();
    require_one_of(c.variant, {"deterministic", "stochastic", "layerwise"}, s.ctx("variant"));
    require_one_of(c.momentum, {"none", "constant", "timevarying"}, s.ctx("momentum"));
    require_one_of(c.momentum_init, {"first_gradient", "zero"}, s.ctx("momentum_init"));
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("[optimizer] alpha: must lie in (0, 1]");
  }

  if (auto t = tree.get_child_optional("oracle")) {
    Section s(*t, "oracle");
    read_oracle_keys(s, c.oracle, base_dir);
    s.size("measure_delta_every", c.measure_delta_every);
    s.finish();
  }

  for (const auto& kv : tree) {
    if (kv.first.rfind("block.", 0) != 0) continue;
    const std::string name = kv.first.substr(6);
    Section s(kv.second, kv.first);
    BlockConfig b;
    if (kv.second.count("step") || kv.second.count("gamma") || kv.second.count("L") || kv.second.count("L0") ||
        kv.second.count("L1")) {
      StepConfig st = c.step;
      read_step_keys(s, st);
      b.step = st;
    }
    if (has_oracle_keys(kv.second)) {
      OracleConfig o = c.oracle;
      read_oracle_keys(s, o, base_dir);
      b.oracle = o;
    }
    s.finish();
    c.blocks[name] = b;
  }
  return c;
}

void put(std::ostringstream& out, const char* key, const std::string& v) { out << key << " = " << v << "\n"; }
void put(std::ostringstream& out, const char* key, double v) { put(out, key, format_double(v)); }
void put_size(std::ostringstream& out, const char* key, std::uint64_t v) { put(out, key, std::to_string(v)); }
void put_opt(std::ostringstream& out, const char* key, const std::optional<double>& v) {
  if (v) put(out, key, *v);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

void write_step(std::ostringstream& out, const StepConfig& s) {
  put(out, "step", s.kind);
  put(out, "gamma", s.gamma);
  put_opt(out, "L", s.L);
  put_opt(out, "L0", s.L0);
  put_opt(out, "L1", s.L1);
}

void write_oracle(std::ostringstream& out, const OracleConfig& o) {
  put(out, "kind", o.kind);
  put_size(out, "iterations", static_cast<std::uint64_t>(o.iterations));
  put(out, "normalization", o.normalization);
  if (!o.table.empty()) put(out, "table", o.table);
  put_opt(out, "spectrum_floor", o.spectrum_floor);
  put_opt(out, "scale_margin", o.scale_margin);
}

void write_run(std::ostringstream& out, const RunConfig& c) {
  out << "[run]\n";
  put_size(out, "K", c.K);
  put(out, "seeds", join(c.seeds));
  put(out, "run_id", c.run_id);
  if (!c.output.empty()) put(out, "output", c.output);
  put_size(out, "eval_every", c.eval_every);

  const ProblemSpec& p = c.problem;
  out << "\n[problem]\n";
  put(out, "name", p.name);
  put_size(out, "rows", p.rows);
  put_size(out, "cols", p.cols);
  put_size(out, "dim", p.dim);
  put_size(out, "samples", p.samples);
  put_size(out, "classes", p.classes);
  put_size(out, "batch", p.batch);
  put_size(out, "target_rank", p.target_rank);
  put_size(out, "seed", p.seed);
  put(out, "sigma", p.sigma);
  put(out, "norm", p.norm);
  put(out, "target", p.target);
  put(out, "init", p.init);
  put(out, "init_scale", p.init_scale);
  put(out, "x0_norm", p.x0_norm);
  put(out, "margin", p.margin);
  put(out, "teacher_scale", p.teacher_scale);
  put_opt(out, "L", p.L);

  out << "\n[optimizer]\n";
  put(out, "variant", c.variant);
  write_step(out, c.step);
  put(out, "momentum", c.momentum);
  put(out, "alpha", c.alpha);
  put(out, "momentum_init", c.momentum_init);

  out << "\n[oracle]\n";
  write_oracle(out, c.oracle);
  put_size(out, "measure_delta_every", c.measure_delta_every);

  for (const auto& [name, b] : c.blocks) {
    out << "\n[block." << name << "]\n";
    if (b.step) write_step(out, *b.step);
    if (b.oracle) write_oracle(out, *b.oracle);
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<double> parse_double_list(std::string_view text) {
  const std::string t = trim(text);
  const std::string ctx = "list '" + t + "'";
  for (const char* fn : {"geomspace", "linspace"}) {
    const std::string f(fn);
    if (t.rfind(f + "(", 0) == 0) {
      if (t.back() != ')') throw ConfigError(ctx + ": missing ')'");
      const auto args = split(std::string_view(t).substr(f.size() + 1, t.size() - f.size() - 2), ',');
      if (args.size() != 3) throw ConfigError(ctx + ": expected (start, stop, count)");
      const double a = to_double(args[0], ctx), b = to_double(args[1], ctx);
      const std::size_t n = to_size(args[2], ctx);
      if (n == 0) throw ConfigError(ctx + ": count must be positive");
      if (f == "geomspace" && !(a > 0.0 && b > 0.0)) throw ConfigError(ctx + ": geomspace needs positive ends");
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = f == "geomspace" ? a * std::pow(b / a, u) : a + (b - a) * u;
      }
      out.front() = a;
      if (n > 1) out.back() = b;
      return out;
    }
  }
  std::vector<double> out;
  for (const auto& s : split(t, ',')) out.push_back(to_double(s, ctx));
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  const pt::ptree tree = read_tree(text);
  if (tree.count("sweep")) throw ConfigError("[sweep] belongs in a sweep file, not a run config");
  return read_run(tree, base_dir, false);
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(slurp(path), path.parent_path());
}

SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& base_dir) {
  const pt::ptree tree = read_tree(text);
  SweepSpec sp;
  sp.base = read_run(tree, base_dir, true);
  sp.seeds = sp.base.seeds;
  const auto t = tree.get_child_optional("sweep");
  if (!t) throw ConfigError("sweep file needs a [sweep] section");
  Section s(*t, "sweep");
  if (auto v = s.get("gamma")) {
    sp.gammas = parse_double_list(*v);
  } else {
    sp.gammas = {sp.base.step.gamma};
  }
  if (auto v = s.get("alpha")) {
    sp.alphas = parse_double_list(*v);
  } else {
    sp.alphas = {sp.base.alpha};
  }
  if (auto v = s.get("oracle_iters")) {
    for (const auto& x : split(*v, ',')) sp.oracle_iters.push_back(static_cast<int>(to_u64(x, s.ctx("oracle_iters"))));
  } else {
    sp.oracle_iters = {sp.base.oracle.kind == "exact" ? 0 : sp.base.oracle.iterations};
  }
  if (auto v = s.get("seeds")) sp.seeds = parse_seed_list(*v, s.ctx("seeds"));
  s.size("max_cells", sp.max_cells);
  s.str("output", sp.output);
  s.str("aggregate_output", sp.aggregate_output);
  s.finish();

  for (double g : sp.gammas)
    if (!(g > 0.0)) throw ConfigError("[sweep] gamma: values must be positive");
  for (double a : sp.alphas)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("[sweep] alpha: values must lie in (0, 1]");
  if (sp.gammas.empty() || sp.alphas.empty() || sp.oracle_iters.empty() || sp.seeds.empty()) {
    throw ConfigError("[sweep] grids must be nonempty");
  }
  if (sp.cell_count() > sp.max_cells) {
    throw ConfigError("[sweep] " + std::to_string(sp.cell_count()) + " cells exceed max_cells = " +
                      std::to_string(sp.max_cells));
  }
  if (sp.base.oracle.kind == "exact" &&
      std::any_of(sp.oracle_iters.begin(), sp.oracle_iters.end(), [](int i) { return i > 0; })) {
    throw ConfigError("[sweep] oracle_iters > 0 needs an iterative [oracle] kind");
  }
  return sp;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  return parse_sweep_spec(slurp(path), path.parent_path());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream out;
  write_run(out, c);
  return out.str();
}

std::string to_ini(const SweepSpec& s) {
  std::ostringstream out;
  write_run(out, s.base);
  out << "\n[sweep]\n";
  put(out, "gamma", join(s.gammas));
  put(out, "alpha", join(s.alphas));
  put(out, "oracle_iters", join(s.oracle_iters));
  put(out, "seeds", join(s.seeds));
  put_size(out, "max_cells", s.max_cells);
  if (!s.output.empty()) put(out, "output", s.output);
  if (!s.aggregate_output.empty()) put(out, "aggregate_output", s.aggregate_output);
  return out.str();
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& p) {
  std::unique_ptr<Problem> prob;
  if (p.name == "quadratic") {
    QuadraticOptions o;
    o.rows = p.rows;
    o.cols = p.cols;
    o.seed = p.seed;
    o.sigma = p.sigma;
    o.norm = norm_kind_from_string(p.norm);
    o.target = p.target == "zero" ? QuadraticTarget::Zero : QuadraticTarget::Random;
    o.init = p.init == "identity" ? QuadraticInit::Identity
                                  : (p.init == "random" ? QuadraticInit::Random : QuadraticInit::Zero);
    prob = make_matrix_quadratic(o);
  } else if (p.name == "logistic") {
    LogisticOptions o;
    o.dim = p.dim;
    o.samples = p.samples;
    o.classes = p.classes;
    o.batch = p.batch;
    o.seed = p.seed;
    o.extra_sigma = p.sigma;
    o.margin = p.margin;
    o.teacher_scale = p.teacher_scale;
    prob = make_logistic(o);
  } else if (p.name == "factorization") {
    FactorizationOptions o;
    o.n = p.rows;
    o.r = p.cols;
    o.target_rank = p.target_rank ? p.target_rank : p.cols;
    o.seed = p.seed;
    o.init_scale = p.init_scale;
    o.sigma = p.sigma;
    prob = make_matrix_factorization(o);
  } else if (p.name == "quartic") {
    QuarticOptions o;
    o.dim = p.dim;
    o.seed = p.seed;
    o.x0_norm = p.x0_norm;
    prob = make_quartic(o);
  } else {
    throw ConfigError("unknown problem '" + p.name + "'");
  }
  if (p.L) prob->declare_smoothness(*p.L);
  return prob;
}

StepPolicy build_step(const StepConfig& s) {
  if (s.kind == "constant") return ConstantStep{s.gamma};
  if (s.kind == "adaptive") return AdaptiveSmoothStep{s.L};
  if (s.kind == "glsmooth") return AdaptiveGeneralizedStep{s.L0, s.L1};
  if (s.kind == "timevarying") return TimeVaryingStep{s.gamma};
  throw ConfigError("unknown step policy '" + s.kind + "'");
}

BlockOracle build_oracle(const OracleConfig& o) {
  if (o.kind == "exact") return ExactOracle{};
  const Normalization n = normalization_from_string(o.normalization);
  PolarScheme s;
  if (o.kind == "newton_schulz") {
    s = newton_schulz(o.iterations, n);
  } else if (o.kind == "muon") {
    s = muon_quintic(o.iterations);
  } else if (o.kind == "polar_express") {
    s = polar_express(o.iterations);
  } else if (o.kind == "table") {
    s = load_coefficient_table(o.table, o.iterations, n).scheme;
  } else if (o.kind == "svd") {
    s = svd_reference();
  } else {
    throw ConfigError("unknown oracle kind '" + o.kind + "'");
  }
  s.normalization = n;
  if (o.spectrum_floor) s.spectrum_floor = o.spectrum_floor;
  if (o.scale_margin) s.scale_margin = *o.scale_margin;
  try {
    validate(s);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("[oracle] ") + e.what());
  }
  return s;
}

OptimizerConfig build_optimizer(const RunConfig& c, std::uint64_t seed) {
  OptimizerConfig o;
  o.variant = variant_from_string(c.variant);
  o.step = build_step(c.step);
  if (c.momentum == "none") {
    o.momentum = NoMomentum{};
  } else if (c.momentum == "constant") {
    o.momentum = ConstantMomentum{c.alpha};
  } else {
    o.momentum = TimeVaryingMomentum{c.alpha};
  }
  o.momentum_init = c.momentum_init == "zero" ? MomentumInit::Zero : MomentumInit::FirstGradient;
  o.oracle.default_oracle = build_oracle(c.oracle);
  o.oracle.measure_delta_every = c.measure_delta_every;
  for (const auto& [name, b] : c.blocks) {
    if (b.oracle) o.oracle.per_block[name] = build_oracle(*b.oracle);
    if (b.step) o.block_steps[name] = build_step(*b.step);
  }
  o.seed = seed;
  o.eval_every = c.eval_every;
  return o;
}

}  // namespace imuon::harness
