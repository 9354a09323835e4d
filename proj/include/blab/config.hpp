#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blab {

enum class Command { VerifyIdentities, FitExpansion, Reduce, Continuation };

struct ModelSpec {
  std::string kind = "flat";  // flat | sphere | warped
  int m = 9;
  double a0 = 1.0;
  double a_quad = 0.0;  // isotropic weight curvature: a = a0 + a_quad/2 |y|^2
  double h0 = 0.0;
  double radius = 1.0;  // sphere radius
  double injectivity_radius = 1.0;
  // warped inputs (kind = warped): a = omega^m from these
  double omega0 = 1.0;
  double omega_quad = 0.0;
  int fiber_dim = 1;
};

struct RunConfig {
  Command command = Command::VerifyIdentities;
  ModelSpec model;
  int k_min = 6, k_max = 14;      // eps = 2^{-k}
  int sign = +1;                  // +1, -1, or 0 for both (fits only)
  double t = 1.0, t_secondary = 2.0;
  double t_lo = 0.25, t_hi = 4.0;
  int nodes_per_delta = 64;
  double domain_radius = 2.0;
  double fp_tol = 1e-11;
  double newton_tol = 1e-8;
  bool low_dimension_override = false;  // allow reduction demos below m = 9
  std::map<std::string, double> tolerances;
  std::string output_dir = "out";
  int workers = 1;
  unsigned seed = 1234;

  /// strictly decreasing |eps| ladder for this run's sign (or +)
  std::vector<double> ladder(int sign_sel) const;
};

/// Parses the key = value config (flat sections). Throws std::runtime_error
/// with a line-tagged message on malformed input or invariant violations.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

class ManifoldModel;
ManifoldModel make_model(const ModelSpec& spec);

}  // namespace blab
