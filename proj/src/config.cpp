#include "blab/config.hpp"

#include "blab/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blab {

std::vector<double> RunConfig::ladder(int sign_sel) const {
  std::vector<double> out;
  for (int k = k_min; k <= k_max; ++k)
    out.push_back(sign_sel * std::pow(2.0, -k));
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KvStore {
  std::map<std::string, std::string> kv;
  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string str(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  double num(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
      throw std::runtime_error("bad numeric value for '" + k + "'");
    return v;
  }
  int integer(const std::string& k, int dflt) const {
    return int(std::llround(num(k, dflt)));
  }
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  KvStore store;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    store.kv[key] = trim(line.substr(eq + 1));
  }

  RunConfig cfg;
  const std::string cmd = store.str("run.command", "verify-identities");
  if (cmd == "verify-identities")
    cfg.command = Command::VerifyIdentities;
  else if (cmd == "fit-expansion")
    cfg.command = Command::FitExpansion;
  else if (cmd == "reduce")
    cfg.command = Command::Reduce;
  else if (cmd == "continuation")
    cfg.command = Command::Continuation;
  else
    throw std::runtime_error("unknown command '" + cmd + "'");
  cfg.workers = store.integer("run.workers", 1);
  cfg.seed = unsigned(store.integer("run.seed", 1234));
  cfg.output_dir = store.str("run.output_dir", "out");

  cfg.model.kind = store.str("model.kind", "flat");
  if (cfg.model.kind != "flat" && cfg.model.kind != "sphere" &&
      cfg.model.kind != "warped")
    throw std::runtime_error("unknown model kind '" + cfg.model.kind + "'");
  cfg.model.m = store.integer("model.m", 9);
  cfg.model.a0 = store.num("model.a0", 1.0);
  cfg.model.a_quad = store.num("model.a_quad", 0.0);
  cfg.model.h0 = store.num("model.h0", 0.0);
  cfg.model.radius = store.num("model.radius", 1.0);
  cfg.model.injectivity_radius = store.num("model.injectivity_radius", 1.0);
  cfg.model.omega0 = store.num("model.omega0", 1.0);
  cfg.model.omega_quad = store.num("model.omega_quad", 0.0);
  cfg.model.fiber_dim = store.integer("model.fiber_dim", 1);

  cfg.k_min = store.integer("ladder.k_min", 6);
  cfg.k_max = store.integer("ladder.k_max", 14);
  if (cfg.k_min > cfg.k_max)
    throw std::runtime_error("ladder must be decreasing in |eps| (k_min <= k_max)");
  const std::string sign = store.str("ladder.sign", "plus");
  if (sign == "plus")
    cfg.sign = +1;
  else if (sign == "minus")
    cfg.sign = -1;
  else if (sign == "both")
    cfg.sign = 0;
  else
    throw std::runtime_error("ladder sign must be plus, minus or both");
  if (cfg.sign == 0 && cfg.command != Command::FitExpansion)
    throw std::runtime_error("sign-homogeneous ladder required for this command");

  cfg.t = store.num("fit.t", 1.0);
  cfg.t_secondary = store.num("fit.t_secondary", 2.0);
  cfg.t_lo = store.num("reduce.t_lo", 0.25);
  cfg.t_hi = store.num("reduce.t_hi", 4.0);
  if (!(cfg.t_lo > 0.0) || !(cfg.t_hi > cfg.t_lo))
    throw std::runtime_error("t interval must satisfy 0 < t_lo < t_hi");
  cfg.nodes_per_delta = store.integer("reduce.nodes_per_delta", 64);
  cfg.domain_radius = store.num("reduce.domain_radius", 2.0);
  cfg.fp_tol = store.num("reduce.fp_tol", 1e-11);
  cfg.newton_tol = store.num("reduce.newton_tol", 1e-8);
  cfg.low_dimension_override =
      store.integer("reduce.low_dimension_override", 0) != 0;

  for (const auto& [k, v] : store.kv) {
    if (k.rfind("tolerances.", 0) == 0) {
      const double tv = store.num(k, 0.0);
      if (!(tv > 0.0))
        throw std::runtime_error("tolerance '" + k + "' must be positive");
      cfg.tolerances[k.substr(11)] = tv;
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ManifoldModel make_model(const ModelSpec& spec) {
  const int m = spec.m;
  std::vector<double> ah(size_t(m) * m, 0.0);
  for (int i = 0; i < m; ++i) ah[i * m + i] = spec.a_quad;
  if (spec.kind == "flat")
    return ManifoldModel(m, {}, spec.a0, {}, std::move(ah), spec.h0,
                         spec.injectivity_radius);
  if (spec.kind == "sphere") {
    ManifoldModel sph = round_sphere_model(m, spec.radius, spec.h0,
                                           spec.injectivity_radius);
    if (spec.a_quad == 0.0 && spec.a0 == 1.0) return sph;
    std::vector<double> H(size_t(m) * m * m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int r = 0; r < m; ++r)
          for (int k = 0; k < m; ++k)
            H[((size_t(i) * m + j) * m + r) * m + k] = sph.H(i, j, r, k);
    return ManifoldModel(m, std::move(H), spec.a0, {}, std::move(ah), spec.h0,
                         spec.injectivity_radius);
  }
  // warped: a = omega^m with an isotropic omega Hessian
  WarpedProduct wp;
  wp.m = m;
  wp.fiber_dim = spec.fiber_dim;
  wp.omega0 = spec.omega0;
  wp.omega_grad.assign(m, 0.0);
  wp.omega_hess.assign(size_t(m) * m, 0.0);
  for (int i = 0; i < m; ++i) wp.omega_hess[i * m + i] = spec.omega_quad;
  wp.h0 = spec.h0;
  return reduce_to_anisotropic(wp, spec.injectivity_radius);
}

}  // namespace blab
