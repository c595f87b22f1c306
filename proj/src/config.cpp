#include "pinnobs/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pinnobs {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
std::vector<T> parse_list(const std::string& v, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      if constexpr (std::is_same_v<T, long>) {
        out.push_back(std::stol(item));
      } else {
        out.push_back(std::stod(item));
      }
    } catch (const std::exception&) {
      throw ConfigError("config: bad value '" + item + "' in list key '" + key + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: empty list for key '" + key + "'");
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value '" + v + "' for key '" + key + "'");
  }
}

long to_long(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value '" + v + "' for key '" + key + "'");
  }
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if constexpr (std::is_same_v<T, long>) {
      s += std::to_string(xs[i]);
    } else {
      s += fmt(xs[i]);
    }
    if (i + 1 < xs.size()) s += ",";
  }
  return s;
}

}  // namespace

RunConfig RunConfig::defaults_for(const std::string& problem_id) {
  RunConfig c;
  c.problem = problem_id;
  if (problem_id == "mms1d") {
    // paper-scale 1D configuration
  } else if (problem_id == "mms2d-case1") {
    c.iterations = 2000;
    c.decay_gamma = 0.1;
    c.lambda_obs = 0.0;  // the obstacle never binds in case 1
  } else if (problem_id == "mms2d-case2") {
    c.iterations = 2000;
    c.decay_gamma = 0.01;
    c.lambda_obs = 4000.0;
  } else if (problem_id == "sia-mms") {
    c.iterations = 2000;
    c.decay_gamma = 0.1;
    c.mu = 0.1;
  } else if (problem_id == "raster") {
    c.hidden_layers = 15;
    c.width = 320;
    c.iterations = 20000;
    c.base_lr = 5e-3;
    c.lr_profile = "raster";
    c.mu = 5e-4;
    c.decay_gamma = 0.2;
  } else {
    throw ConfigError("config: unknown problem '" + problem_id + "'");
  }
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "problem") {
    problem = value;
  } else if (key == "hidden_layers") {
    hidden_layers = static_cast<int>(to_long(value, key));
  } else if (key == "width") {
    width = static_cast<int>(to_long(value, key));
  } else if (key == "activation") {
    if (value != "relu2" && value != "tanh")
      throw ConfigError("config: activation must be relu2 or tanh, got '" + value + "'");
    activation = value;
  } else if (key == "iterations") {
    iterations = to_long(value, key);
    if (iterations < 0) throw ConfigError("config: iterations must be >= 0");
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_long(value, key));
  } else if (key == "base_lr") {
    base_lr = to_double(value, key);
  } else if (key == "init_gain") {
    init_gain = to_double(value, key);
  } else if (key == "lr_profile") {
    if (value != "mms" && value != "raster")
      throw ConfigError("config: lr_profile must be mms or raster, got '" + value + "'");
    lr_profile = value;
  } else if (key == "lr_milestones") {
    lr_milestones = parse_list<long>(value, key);
  } else if (key == "batch_interior") {
    batch_interior = static_cast<int>(to_long(value, key));
  } else if (key == "batch_boundary") {
    batch_boundary = static_cast<int>(to_long(value, key));
  } else if (key == "batch_initial") {
    batch_initial = static_cast<int>(to_long(value, key));
  } else if (key == "alpha") {
    alpha = to_double(value, key);
  } else if (key == "beta") {
    beta = to_double(value, key);
  } else if (key == "gamma_w") {
    gamma_w = to_double(value, key);
  } else if (key == "delta") {
    delta = to_double(value, key);
  } else if (key == "lambda_obs") {
    lambda_obs = to_double(value, key);
  } else if (key == "glen_p") {
    glen_p = to_double(value, key);
  } else if (key == "mu") {
    mu = to_double(value, key);
  } else if (key == "eps_time") {
    eps_time = to_double(value, key);
  } else if (key == "eps_phi") {
    eps_phi = to_double(value, key);
  } else if (key == "delta_flux") {
    delta_flux = to_double(value, key);
  } else if (key == "decay_gamma") {
    decay_gamma = to_double(value, key);
  } else if (key == "eval_points") {
    eval_points = static_cast<int>(to_long(value, key));
  } else if (key == "deterministic") {
    deterministic = to_long(value, key) != 0;
  } else if (key == "data_dir") {
    data_dir = value;
  } else if (key == "atilde") {
    if (value != "synthetic" && value != "zero")
      throw ConfigError("config: atilde must be synthetic or zero, got '" + value + "'");
    atilde = value;
  } else if (key == "stage1_iterations") {
    stage1_iterations = to_long(value, key);
  } else if (key == "stage1_lr") {
    stage1_lr = to_double(value, key);
  } else if (key == "stage1_tol") {
    stage1_tol = to_double(value, key);
  } else if (key == "stage1_batch") {
    stage1_batch = static_cast<int>(to_long(value, key));
  } else if (key == "oracle_nx") {
    oracle_nx = static_cast<int>(to_long(value, key));
  } else if (key == "oracle_nt") {
    oracle_nt = static_cast<int>(to_long(value, key));
  } else if (key == "jobs") {
    jobs = static_cast<int>(to_long(value, key));
  } else if (key == "sweep_mu") {
    sweep_mu = parse_list<double>(value, key);
  } else if (key == "sweep_p") {
    sweep_p = parse_list<double>(value, key);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig RunConfig::parse_text(const std::string& text) {
  // First pass: find the problem id so the right defaults apply.
  std::string problem_id = "mms1d";
  std::istringstream scan(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> entries;
  while (std::getline(scan, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key in line '" + line + "'");
    entries.emplace_back(key, value);
    if (key == "problem") problem_id = value;
  }
  RunConfig c = defaults_for(problem_id);
  for (const auto& [key, value] : entries) c.set(key, value);
  return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str());
}

std::string RunConfig::echo() const {
  std::ostringstream o;
  o << "problem = " << problem << "\n";
  o << "hidden_layers = " << hidden_layers << "\n";
  o << "width = " << width << "\n";
  o << "activation = " << activation << "\n";
  o << "iterations = " << iterations << "\n";
  o << "seed = " << seed << "\n";
  o << "base_lr = " << fmt(base_lr) << "\n";
  o << "init_gain = " << fmt(init_gain) << "\n";
  o << "lr_profile = " << lr_profile << "\n";
  o << "lr_milestones = " << join(lr_milestones) << "\n";
  o << "batch_interior = " << batch_interior << "\n";
  o << "batch_boundary = " << batch_boundary << "\n";
  o << "batch_initial = " << batch_initial << "\n";
  o << "alpha = " << fmt(alpha) << "\n";
  o << "beta = " << fmt(beta) << "\n";
  o << "gamma_w = " << fmt(gamma_w) << "\n";
  o << "delta = " << fmt(delta) << "\n";
  o << "lambda_obs = " << fmt(lambda_obs) << "\n";
  o << "glen_p = " << fmt(glen_p) << "\n";
  o << "mu = " << fmt(mu) << "\n";
  o << "eps_time = " << fmt(eps_time) << "\n";
  o << "eps_phi = " << fmt(eps_phi) << "\n";
  o << "delta_flux = " << fmt(delta_flux) << "\n";
  o << "decay_gamma = " << fmt(decay_gamma) << "\n";
  o << "eval_points = " << eval_points << "\n";
  o << "deterministic = " << (deterministic ? 1 : 0) << "\n";
  o << "data_dir = " << data_dir << "\n";
  o << "atilde = " << atilde << "\n";
  o << "stage1_iterations = " << stage1_iterations << "\n";
  o << "stage1_lr = " << fmt(stage1_lr) << "\n";
  o << "stage1_tol = " << fmt(stage1_tol) << "\n";
  o << "stage1_batch = " << stage1_batch << "\n";
  o << "oracle_nx = " << oracle_nx << "\n";
  o << "oracle_nt = " << oracle_nt << "\n";
  o << "jobs = " << jobs << "\n";
  o << "sweep_mu = " << join(sweep_mu) << "\n";
  o << "sweep_p = " << join(sweep_p) << "\n";
  return o.str();
}

ArchitectureSpec RunConfig::arch(int input_dim) const {
  ArchitectureSpec a;
  a.input_dim = input_dim;
  a.hidden_layers = hidden_layers;
  a.width = width;
  a.activation = activation == "relu2" ? Activation::relu2 : Activation::tanh;
  a.validate();
  return a;
}

LossWeights RunConfig::weights() const {
  LossWeights w;
  w.alpha = alpha;
  w.beta = beta;
  w.gamma_w = gamma_w;
  w.delta = delta;
  w.lambda_obs = lambda_obs;
  return w;
}

SIAConstants RunConfig::sia() const {
  SIAConstants c;
  c.p = glen_p;
  c.mu = mu;
  c.eps_time = eps_time;
  c.eps_phi = eps_phi;
  c.delta_flux = delta_flux;
  return c;
}

TrainOptions RunConfig::train_options(int input_dim) const {
  TrainOptions t;
  t.arch = arch(input_dim);
  t.weights = weights();
  t.iterations = iterations;
  t.seed = seed;
  t.batch = BatchSizes{batch_interior, batch_boundary, batch_initial};
  t.lr_profile = lr_profile == "mms" ? LrProfile::mms : LrProfile::raster;
  t.base_lr = base_lr;
  t.init_gain = init_gain;
  t.milestones = lr_milestones;
  t.eval_points = eval_points;
  t.deterministic = deterministic;
  t.config_echo = echo();
  return t;
}

TwoStageOptions RunConfig::two_stage_options() const {
  TwoStageOptions o;
  o.stage2 = train_options(3);
  o.stage1_iterations = stage1_iterations;
  o.stage1_lr = stage1_lr;
  o.stage1_tol = stage1_tol;
  o.stage1_batch = stage1_batch;
  return o;
}

Problem RunConfig::make_problem() const {
  if (problem == "mms1d") return make_mms1d(decay_gamma);
  if (problem == "mms2d-case1") return make_mms2d(1, decay_gamma);
  if (problem == "mms2d-case2") return make_mms2d(2, decay_gamma);
  if (problem == "sia-mms") return make_sia_mms(sia(), decay_gamma);
  if (problem == "raster") {
    if (data_dir.empty()) throw ConfigError("config: raster problem needs data_dir");
    auto data = std::make_shared<RasterProblemData>(load_raster_data(data_dir));
    return make_raster_problem(data, sia(), atilde);
  }
  throw ConfigError("config: unknown problem '" + problem + "'");
}

}  // namespace pinnobs
