// Python bindings for the main operations: bubble calculus, moment
// integrals, the reduced energy, and a radialized reduction run summary.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blab/bubble.hpp"
#include "blab/energy.hpp"
#include "blab/geometry.hpp"
#include "blab/solver.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace blab;

namespace {

ManifoldModel flat_iso(int m, double a0, double a_quad, double h0) {
  std::vector<double> ah(size_t(m) * m, 0.0);
  for (int i = 0; i < m; ++i) ah[i * m + i] = a_quad;
  return ManifoldModel(m, {}, a0, {}, std::move(ah), h0, 1.0);
}

}  // namespace

PYBIND11_MODULE(pyblab, mod) {
  mod.doc() = "bubble-concentration laboratory";

  mod.def("bubble_eval", [](int m, const std::vector<double>& z) {
    return bubble_eval(Dimension(m), z);
  });
  mod.def("bubble_rescaled",
          [](int m, double delta, const std::vector<double>& eta,
             const std::vector<double>& z) {
            return bubble_rescaled(Dimension(m), BubbleParams(delta, eta), z);
          });
  mod.def("kernel_eval", [](int m, int i, const std::vector<double>& z) {
    return kernel_eval(Dimension(m), i, z);
  });
  mod.def("bubble_residual", [](int m, int nodes, double rmax) {
    return bubble_residual(Dimension(m), nodes, rmax);
  }, py::arg("m"), py::arg("nodes") = 200, py::arg("rmax") = 50.0);

  mod.def("moment_integral", [](double p, double q) {
    const auto mi = moment_integral(p, q);
    return py::dict("value"_a = mi.value,
                    "value_quadrature"_a = mi.value_quadrature,
                    "recurrences_ok"_a = mi.recurrences_ok);
  });
  mod.def("sphere_constants", [](int m) {
    const auto c = sphere_constants(Dimension(m));
    return py::dict("omega_m"_a = c.omega_m,
                    "omega_m_minus_1"_a = c.omega_m_minus_1, "K_m"_a = c.K_m,
                    "K_pow_minus_m"_a = c.K_pow_minus_m);
  });
  mod.def("identity_locks", [](int m) {
    const auto sc = sphere_constants(Dimension(m));
    return py::dict("vanishing_eta_bracket"_a = vanishing_eta_bracket(m),
                    "laplacian_moment_bracket"_a = laplacian_moment_bracket(m),
                    "hessian_moment_bracket"_a = hessian_moment_bracket(m),
                    "K_pow_minus_m"_a = sc.K_pow_minus_m);
  });

  mod.def("concentration_threshold",
          [](int m, double a0, double a_quad, double h0) {
            return concentration_threshold(flat_iso(m, a0, a_quad, h0));
          });
  mod.def("critical_t",
          [](int m, double a0, double a_quad, double h0, int sign_eps) {
            const auto fn =
                ReducedEnergyFn::from_model(flat_iso(m, a0, a_quad, h0), sign_eps);
            const auto cp = critical_point(fn);
            return py::dict("t0"_a = cp.t0,
                            "nondegenerate"_a = cp.nondegenerate);
          });
  mod.def("phi_eval", [](int m, double a0, double a_quad, double h0,
                         int sign_eps, double t, std::vector<double> eta) {
    const auto fn = ReducedEnergyFn::from_model(flat_iso(m, a0, a_quad, h0),
                                                sign_eps);
    return fn.eval(t, eta);
  });

  mod.def("expansion_fit_flat",
          [](int m, int k_min, int k_max, double t) {
            std::vector<double> ladder;
            for (int k = k_min; k <= k_max; ++k) {
              ladder.push_back(std::pow(2.0, -k));
              ladder.push_back(-std::pow(2.0, -k));
            }
            std::vector<double> eta;
            const auto rep = expansion_fit(flat_iso(m, 1.0, 0.0, 0.0), t, eta,
                                           ladder);
            return py::dict("a_m"_a = rep.coeffs.a_m, "b_m"_a = rep.coeffs.b_m,
                            "c_m"_a = rep.coeffs.c_m,
                            "rel_residual"_a = rep.coeffs.rel_residual);
          },
          py::arg("m") = 9, py::arg("k_min") = 6, py::arg("k_max") = 12,
          py::arg("t") = 1.0);

  mod.def("correction_fixed_point",
          [](int m, double a_quad, double h0, double eps, double t, int npd) {
            SolveOptions opt;
            opt.nodes_per_delta = npd;
            RadialReduction red(flat_iso(m, 1.0, a_quad, h0), opt);
            const auto st = red.correction_fixed_point(eps, t);
            return py::dict("iterations"_a = st.iterations,
                            "contraction_ratio"_a = st.contraction_ratio,
                            "phi_norm_H"_a = st.norm_phi_H,
                            "multiplier0"_a = st.multipliers[0],
                            "converged"_a = st.converged);
          },
          py::arg("m") = 9, py::arg("a_quad") = 2.0, py::arg("h0") = 1.0,
          py::arg("eps") = 1.0 / 1024, py::arg("t") = 1.0,
          py::arg("npd") = 32);
}
